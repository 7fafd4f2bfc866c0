"""Cutoff selection by the barycenter of curiosity points."""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Dataset, HyperParams
from .estimator import DivergedSimulation, fit, simulate
from .filter2d import butterworth_alpha
from .kernels import extended_gram

logger = logging.getLogger(__name__)

DEFAULT_FRACTIONS = (0.05, 0.08, 0.13, 0.2, 0.32, 0.5)
DEFAULT_MU = 130.0


class AllDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class CuriositySet:
    """Candidate cutoffs (rad/s) and the barycenter sharpness ``mu``."""

    omegas: np.ndarray
    mu: float = DEFAULT_MU

    def __post_init__(self):
        w = np.array(self.omegas, dtype=float).ravel()
        if w.size == 0:
            raise ValueError("at least one curiosity point is required")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("curiosity points must be finite and positive")
        if np.any(np.diff(w) <= 0):
            raise ValueError("curiosity points must be strictly increasing")
        if not (np.isfinite(self.mu) and self.mu >= 0):
            raise ValueError(f"mu must be >= 0, got {self.mu}")
        w.setflags(write=False)
        object.__setattr__(self, "omegas", w)
        object.__setattr__(self, "mu", float(self.mu))

    @classmethod
    def default(cls, Ts: float = 1.0, mu: float = DEFAULT_MU) -> "CuriositySet":
        """Six log-spaced cutoffs, ``{0.05, ..., 0.5} * (1/pi) * pi/Ts`` rad/s."""
        nyquist = np.pi / Ts
        return cls(np.array(DEFAULT_FRACTIONS) / np.pi * nyquist, mu)

    def check_nyquist(self, Ts: float) -> None:
        if np.any(self.omegas * Ts >= np.pi):
            raise ValueError(
                f"curiosity points must lie below the Nyquist frequency {np.pi / Ts}")


@dataclass(frozen=True)
class TuningReport:
    omegas: np.ndarray
    J: np.ndarray
    weights: np.ndarray
    diverged: np.ndarray
    omega_star: float

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["omega", "J", "weight"])
            for om, j, wt in zip(self.omegas, self.J, self.weights):
                w.writerow([repr(float(om)), repr(float(j)), repr(float(wt))])
            w.writerow(["omega_star", repr(float(self.omega_star)), ""])


def _normalized_error(y, y_hat) -> float:
    spread = np.linalg.norm(y - y.mean())
    if spread == 0.0:
        return 1.0
    return min(np.linalg.norm(y - y_hat) / spread, 1.0)


def j_index(d: Dataset, hyper: HyperParams, omega: float, kernel=None,
            holdout: float = 0.0, ext_gram=None) -> float:
    """Free-run normalized error, clipped to 1, for cutoff ``omega``.

    With ``holdout > 0`` the model is fitted on the leading part of ``d`` and
    scored on the trailing ``holdout`` fraction. A diverging simulation scores
    the worst value, 1.
    """
    return _j_and_flag(d, hyper, omega, kernel, holdout, ext_gram)[0]


def _split(d: Dataset, holdout: float):
    if not 0.0 <= holdout < 1.0:
        raise ValueError("holdout must be in [0, 1)")
    if holdout == 0.0:
        return d, d
    cut = int(round(d.N * (1.0 - holdout)))
    return d.segment(0, cut), d.segment(cut, d.N)


def _j_and_flag(d, hyper, omega, kernel, holdout, ext_gram):
    est, val = _split(d, holdout)
    alpha = butterworth_alpha(omega, d.Ts, hyper.n_x)
    model = fit(est, hyper, alpha, kernel, ext_gram=ext_gram)
    try:
        y_hat = simulate(model, val.u, val.p)
    except DivergedSimulation:
        logger.info("simulation diverged at omega=%g", omega)
        return 1.0, True
    return _normalized_error(val.y, y_hat), False


def barycenter_weights(curiosities: CuriositySet, j_values) -> np.ndarray:
    J = np.asarray(j_values, dtype=float).ravel()
    if J.shape != curiosities.omegas.shape:
        raise ValueError("need one J value per curiosity point")
    if not np.all(np.isfinite(J)):
        raise ValueError("J values must be finite")
    e = curiosities.mu * J
    w = np.exp(-(e - e.min()))
    return w / w.sum()


def barycenter(curiosities: CuriositySet, j_values) -> float:
    """Exponentially weighted mean of the curiosity points, weights ``exp(-mu J)``."""
    w = barycenter_weights(curiosities, j_values)
    om = curiosities.omegas
    return float(np.clip(np.dot(w, om), om[0], om[-1]))


def tune(d: Dataset, hyper: HyperParams, curiosities: CuriositySet | None = None,
         kernel=None, holdout: float = 0.0, workers: int = 1) -> TuningReport:
    """Score every curiosity point and return their barycenter.

    The final model is not fitted here.
    """
    if curiosities is None:
        curiosities = CuriositySet.default(d.Ts)
    curiosities.check_nyquist(d.Ts)
    est, _ = _split(d, holdout)
    G = extended_gram(est, hyper, kernel)

    def score(om):
        return _j_and_flag(d, hyper, om, kernel, holdout, G)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(score, curiosities.omegas))
    else:
        results = [score(om) for om in curiosities.omegas]
    J = np.array([r[0] for r in results])
    diverged = np.array([r[1] for r in results])
    if diverged.all():
        raise AllDiverged("every curiosity point produced a diverging model")
    weights = barycenter_weights(curiosities, J)
    return TuningReport(curiosities.omegas, J, weights, diverged,
                        barycenter(curiosities, J))
