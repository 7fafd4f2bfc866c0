"""LS-SVM dual solve, coefficient reconstruction and free-run simulation."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import LinAlgWarning, lapack, lu_factor, lu_solve

from .core import (AlphaPolynomial, Dataset, HyperParams, TrainedModel,
                   _as_scheduling, companion_from_alpha, validate_dataset)
from .filter2d import filter_gram_2d, iir_filter_1d
from .kernels import RBFKernel, extended_gram, kernel_sequences

MAX_CONDITION = 1e14
DIVERGENCE_LIMIT = 1e9


class SingularSystem(np.linalg.LinAlgError):
    pass


class DivergedSimulation(ArithmeticError):
    pass


class ZeroVariance(ValueError):
    pass


@dataclass(frozen=True)
class CoefficientPair:
    L: np.ndarray
    B: np.ndarray
    pbar: np.ndarray


def filtered_kernel_matrix(d: Dataset, hyper: HyperParams, alpha: AlphaPolynomial,
                           kernel=None, ext_gram=None) -> np.ndarray:
    """Filtered Gram matrix of the time-filtered regressor, ``(N-n_x)`` square.

    ``ext_gram`` may carry a precomputed :func:`extended_gram` so repeated
    fits on the same data only redo the filtering.
    """
    n_x = hyper.n_x
    if ext_gram is None:
        ext_gram = extended_gram(d, hyper, kernel)
    K = filter_gram_2d(alpha, ext_gram).entries[n_x - 1:, n_x - 1:]
    return K


def _solve_dual(K: np.ndarray, gamma: float, Y: np.ndarray) -> np.ndarray:
    S = K + np.eye(K.shape[0]) / gamma
    if not np.all(np.isfinite(S)):
        raise SingularSystem("dual system contains non-finite entries")
    with warnings.catch_warnings():
        # singularity is reported through the condition estimate below
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(S, check_finite=False)
    rcond, info = lapack.dgecon(lu, np.linalg.norm(S, 1), norm="1")
    if info != 0 or rcond * MAX_CONDITION < 1.0:
        raise SingularSystem(
            f"dual system condition estimate {1.0 / max(rcond, 1e-300):.3g} "
            f"exceeds {MAX_CONDITION:.0e}; gamma may be too large")
    return lu_solve((lu, piv), Y, check_finite=False)


def fit(d: Dataset, hyper: HyperParams, alpha: AlphaPolynomial, kernel=None,
        ext_gram=None) -> TrainedModel:
    """Estimate the dual variables for predictor polynomial ``alpha``.

    Solves ``(I / gamma + K) lam = Y`` where ``K`` is the 2D-filtered Gram
    matrix and ``Y = [y_{n_x+1}, ..., y_N]``.
    """
    if alpha.n_x != hyper.n_x:
        raise ValueError(f"alpha has order {alpha.n_x}, hyper.n_x = {hyper.n_x}")
    validate_dataset(d, hyper.n_x)
    K = filtered_kernel_matrix(d, hyper, alpha, kernel, ext_gram)
    lam = _solve_dual(K, hyper.gamma, d.y[hyper.n_x:])
    return TrainedModel(d, lam, alpha, hyper, kernel)


def _model_kernel(m: TrainedModel):
    return RBFKernel(m.hyper.sigma) if m.kernel is None else m.kernel


def reconstruct_batch(m: TrainedModel, pbars) -> tuple[np.ndarray, np.ndarray]:
    """``L(p)`` and ``B(p)`` at each row of ``pbars``; both ``(M, n_x)``."""
    d, n_x = m.dataset, m.n_x
    pb = _as_scheduling(pbars)
    sy, su = kernel_sequences(pb, d, kernel=_model_kernel(m))
    fy = iir_filter_1d(m.alpha, sy, axis=1)
    fu = iir_filter_1d(m.alpha, su, axis=1)
    n_col = d.N - n_x
    L = np.empty((pb.shape[0], n_x))
    B = np.empty((pb.shape[0], n_x))
    # row r of the Hankel matrices spans filtered samples r .. r + N - n_x - 1
    for r in range(n_x):
        L[:, r] = fy[:, r:r + n_col] @ m.lam
        B[:, r] = fu[:, r:r + n_col] @ m.lam
    return L, B


def reconstruct(m: TrainedModel, pbar) -> CoefficientPair:
    pb = np.atleast_1d(np.asarray(pbar, dtype=float)).reshape(1, -1)
    L, B = reconstruct_batch(m, pb)
    return CoefficientPair(L[0], B[0], pb[0])


def io_coefficients(m: TrainedModel, pbars) -> tuple[np.ndarray, np.ndarray]:
    """Input-output coefficient functions of the identified model.

    The model is equivalent to
    ``y_k = sum_j a_j(p_{k-j}) y_{k-j} + b_j(p_{k-j}) u_{k-j}``; returns the
    ``(M, n_x)`` arrays of ``a_j`` and ``b_j`` at each scheduling point.
    """
    L, B = reconstruct_batch(m, pbars)
    a = L[:, ::-1] - m.alpha.coeffs[None, :]
    b = B[:, ::-1]
    return a, b


def simulate(m: TrainedModel, u, p) -> np.ndarray:
    """Free-run output of the identified model from a zero initial state."""
    u = np.asarray(u, dtype=float).ravel()
    p = _as_scheduling(p)
    if len(u) != len(p):
        raise ValueError(f"len(u) = {len(u)} differs from len(p) = {len(p)}")
    if len(u) == 0:
        return np.zeros(0)
    # evaluate L, B once per distinct scheduling value
    uniq, inverse = np.unique(p, axis=0, return_inverse=True)
    Lu, Bu = reconstruct_batch(m, uniq)
    inverse = inverse.ravel()
    L, B = Lu[inverse], Bu[inverse]
    A, _ = companion_from_alpha(m.alpha)
    n = m.n_x
    x = np.zeros(n)
    y = np.empty(len(u))
    for k in range(len(u)):
        yk = x[-1]
        if not abs(yk) <= DIVERGENCE_LIMIT:
            raise DivergedSimulation(
                f"simulated output exceeded {DIVERGENCE_LIMIT:.0e} at sample {k + 1}")
        y[k] = yk
        x = A @ x + L[k] * yk + B[k] * u[k]
    return y


def bfr(y_true, y_sim) -> float:
    """Best fit rate in percent, ``100 * max(1 - |Y - Yhat| / |Y - mean(Y)|, 0)``."""
    y_true = np.asarray(y_true, dtype=float).ravel()
    y_sim = np.asarray(y_sim, dtype=float).ravel()
    if y_true.shape != y_sim.shape:
        raise ValueError("y_true and y_sim must have equal lengths")
    if y_true.size < 2:
        raise ValueError("need at least two samples")
    spread = np.linalg.norm(y_true - y_true.mean())
    if spread == 0.0:
        raise ZeroVariance("y_true is constant")
    return float(100.0 * max(1.0 - np.linalg.norm(y_true - y_sim) / spread, 0.0))


def model_to_dict(m: TrainedModel) -> dict:
    if m.kernel is not None:
        raise ValueError("only models with the default RBF kernel can be saved")
    d = m.dataset
    return {
        "n_x": m.n_x,
        "sigma": m.hyper.sigma,
        "gamma": m.hyper.gamma,
        "alpha": m.alpha.coeffs.tolist(),
        "lambda": m.lam.tolist(),
        "training": {
            "u": d.u.tolist(),
            "y": d.y.tolist(),
            "p": d.p.tolist(),
            "Ts": d.Ts,
        },
    }


def model_from_dict(obj: dict) -> TrainedModel:
    hyper = HyperParams(gamma=obj["gamma"], sigma=obj["sigma"], n_x=obj["n_x"])
    tr = obj["training"]
    d = Dataset(tr["u"], tr["y"], tr["p"], tr["Ts"])
    return TrainedModel(d, np.asarray(obj["lambda"], dtype=float),
                        AlphaPolynomial(obj["alpha"]), hyper)


def save_model(m: TrainedModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(m)), encoding="utf-8")


def load_model(path) -> TrainedModel:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
