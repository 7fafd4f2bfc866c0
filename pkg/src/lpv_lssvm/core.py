"""Domain types shared by the estimator, tuner and benchmark.

A :class:`Dataset` holds aligned input ``u``, output ``y`` and scheduling
``p`` samples. Scheduling samples are always stored as an ``(N, n_p)`` array,
so scalar scheduling is simply ``n_p = 1``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DatasetError(ValueError):
    """Base class for dataset validation failures.

    ``field`` names the offending sequence or attribute.
    """

    def __init__(self, message: str, field: str):
        super().__init__(message)
        self.field = field


class LengthMismatch(DatasetError):
    pass


class NonFinite(DatasetError):
    pass


class TooShort(DatasetError):
    pass


class UnstablePolynomial(ValueError):
    pass


def _as_scheduling(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim == 0:
        p = p.reshape(1, 1)
    elif p.ndim == 1:
        p = p[:, None]
    elif p.ndim != 2:
        raise ValueError(f"scheduling must be 1-D or 2-D, got shape {p.shape}")
    return p


def _check_signals(u, y, p, Ts):
    if u.ndim != 1:
        raise LengthMismatch(f"u must be 1-D, got shape {u.shape}", "u")
    if y.ndim != 1:
        raise LengthMismatch(f"y must be 1-D, got shape {y.shape}", "y")
    n = len(u)
    for name, arr in (("y", y), ("p", p)):
        if len(arr) != n:
            raise LengthMismatch(
                f"len({name}) = {len(arr)} differs from len(u) = {n}", name)
    for name, arr in (("u", u), ("y", y), ("p", p)):
        if not np.all(np.isfinite(arr)):
            raise NonFinite(f"{name} contains non-finite values", name)
    if not (np.isfinite(Ts) and Ts > 0):
        raise NonFinite(f"sampling period must be finite and > 0, got {Ts}", "Ts")


@dataclass(frozen=True)
class Dataset:
    """Aligned input/output/scheduling record.

    Parameters
    ----------
    u, y : array_like, shape (N,)
        Input and output samples.
    p : array_like, shape (N,) or (N, n_p)
        Scheduling samples.
    Ts : float
        Sampling period in seconds.
    """

    u: np.ndarray
    y: np.ndarray
    p: np.ndarray
    Ts: float = 1.0

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        y = np.array(self.y, dtype=float)
        p = _as_scheduling(np.array(self.p, dtype=float))
        Ts = float(self.Ts)
        _check_signals(u, y, p, Ts)
        for arr in (u, y, p):
            arr.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "Ts", Ts)

    @property
    def N(self) -> int:
        return len(self.u)

    @property
    def n_p(self) -> int:
        return self.p.shape[1]

    def segment(self, start: int, stop: int) -> "Dataset":
        return Dataset(self.u[start:stop], self.y[start:stop],
                       self.p[start:stop], self.Ts)


def validate_dataset(d: Dataset, n_x: int) -> None:
    """Raise a :class:`DatasetError` unless ``d`` can be used with order ``n_x``."""
    _check_signals(d.u, d.y, d.p, d.Ts)
    if d.N < n_x + 2:
        raise TooShort(
            f"N = {d.N} samples is too short for n_x = {n_x} (need >= {n_x + 2})",
            "u")


@dataclass(frozen=True)
class AlphaPolynomial:
    """Monic predictor polynomial ``q^n (1 + a_1 q^-1 + ... + a_n q^-n)``.

    Only polynomials with every root strictly inside the unit circle are
    accepted. When the polynomial is built from known poles (see
    :meth:`from_roots`) those poles are kept and used for the stability check,
    since root-finding on the coefficients is ill-conditioned for clustered
    poles near ``z = 1``.
    """

    coeffs: np.ndarray
    poles: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if np.iscomplexobj(c):
            if np.any(np.abs(c.imag) > 1e-12 * np.maximum(1.0, np.abs(c.real))):
                raise ValueError("alpha coefficients must be real")
            c = c.real
        c = np.array(c, dtype=float).ravel()
        if c.size == 0:
            raise ValueError("alpha needs at least one coefficient (n_x >= 1)")
        if not np.all(np.isfinite(c)):
            raise ValueError("alpha coefficients must be finite")
        if self.poles is not None:
            z = np.array(self.poles, dtype=complex).ravel()
            if z.size != c.size:
                raise ValueError("number of poles differs from the polynomial order")
            z.setflags(write=False)
            object.__setattr__(self, "poles", z)
        radius = np.max(np.abs(self.roots_of(c)))
        if radius >= 1.0:
            raise UnstablePolynomial(
                f"alpha has a root of modulus {radius:.6g} >= 1")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def roots_of(self, c):
        if self.poles is not None:
            return self.poles
        if not np.any(c):
            return np.zeros(c.size)
        return np.roots(np.r_[1.0, c])

    @property
    def n_x(self) -> int:
        return self.coeffs.size

    @classmethod
    def origin(cls, n_x: int) -> "AlphaPolynomial":
        """All predictor poles at zero, i.e. ``alpha(q) = q^n_x``."""
        if n_x < 1:
            raise ValueError("n_x must be >= 1")
        return cls(np.zeros(n_x))

    @classmethod
    def from_roots(cls, roots) -> "AlphaPolynomial":
        """Polynomial with the given roots; complex roots must come in conjugate pairs."""
        z = np.asarray(roots, dtype=complex).ravel()
        return cls(np.poly(z)[1:], poles=z)

    def roots(self) -> np.ndarray:
        return self.roots_of(self.coeffs)

    def is_origin(self) -> bool:
        return not np.any(self.coeffs)


@dataclass(frozen=True)
class HyperParams:
    gamma: float = 100.0
    sigma: float = 0.2
    n_x: int = 2

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if int(self.n_x) != self.n_x or self.n_x < 1:
            raise ValueError(f"n_x must be an integer >= 1, got {self.n_x}")
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "n_x", int(self.n_x))


def companion_from_alpha(alpha: AlphaPolynomial) -> tuple[np.ndarray, np.ndarray]:
    """Companion pair ``(A, C)`` whose characteristic polynomial is ``alpha``.

    ``A`` has ones on the subdiagonal and ``-alpha_n, ..., -alpha_1`` in its
    last column; ``C = [0 ... 0 1]`` as a ``(1, n_x)`` row.
    """
    n = alpha.n_x
    A = np.zeros((n, n))
    A[np.arange(1, n), np.arange(n - 1)] = 1.0
    A[:, -1] = -alpha.coeffs[::-1]
    C = np.zeros((1, n))
    C[0, -1] = 1.0
    return A, C


@dataclass(frozen=True)
class TrainedModel:
    """Dual solution plus everything needed to evaluate ``L(p)`` and ``B(p)``.

    ``kernel`` is ``None`` for the default RBF of width ``hyper.sigma``.
    """

    dataset: Dataset
    lam: np.ndarray
    alpha: AlphaPolynomial
    hyper: HyperParams
    kernel: object = field(default=None, compare=False)

    def __post_init__(self):
        lam = np.array(self.lam, dtype=float).ravel()
        if lam.size != self.dataset.N - self.hyper.n_x:
            raise ValueError(
                f"len(lambda) = {lam.size}, expected N - n_x = "
                f"{self.dataset.N - self.hyper.n_x}")
        if self.alpha.n_x != self.hyper.n_x:
            raise ValueError("alpha order differs from hyper.n_x")
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)

    @property
    def n_x(self) -> int:
        return self.hyper.n_x


def read_dataset_csv(path, Ts: float = 1.0, require_y: bool = True):
    """Read the ``k,u,y,p_1,...,p_np`` CSV format.

    With ``require_y=False`` the ``y`` column may be absent; the return value
    is then ``(u, y_or_None, p)`` instead of a :class:`Dataset`.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc.strerror}", "path") from exc
    if not rows:
        raise DatasetError(f"{path}: empty file", "header")
    header = [h.strip() for h in rows[0]]
    pcols = [i for i, h in enumerate(header) if h.startswith("p_")]
    missing = [h for h in ("k", "u") if h not in header]
    if require_y and "y" not in header:
        missing.append("y")
    if missing or not pcols:
        raise DatasetError(
            f"{path}: header must be k,u,y,p_1,...,p_np (missing "
            f"{', '.join(missing) or 'p_1'})", "header")
    body = [r for r in rows[1:] if any(c.strip() for c in r)]
    try:
        data = np.array([[float(c) for c in r] for r in body], dtype=float)
    except ValueError as exc:
        raise NonFinite(f"{path}: non-numeric entry ({exc})", "values") from exc
    if data.size and data.shape[1] != len(header):
        raise LengthMismatch(f"{path}: rows do not match header width", "rows")
    data = data.reshape(len(body), len(header))
    u = data[:, header.index("u")]
    y = data[:, header.index("y")] if "y" in header else None
    p = data[:, pcols]
    if require_y:
        return Dataset(u, y, p, Ts)
    _check_signals(u, u if y is None else y, p, Ts)
    return u, y, p


def write_dataset_csv(d: Dataset, path) -> None:
    path = Path(path)
    header = ["k", "u", "y"] + [f"p_{i + 1}" for i in range(d.n_p)]
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for k in range(d.N):
            w.writerow([k + 1, repr(float(d.u[k])), repr(float(d.y[k]))]
                       + [repr(float(v)) for v in d.p[k]])
