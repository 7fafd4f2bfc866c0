"""Scheduling kernels and the unfiltered Gram matrix of the stacked regressor.

A kernel here is any callable ``kernel(P, Q)`` that takes two arrays of
scheduling vectors, shapes ``(n, n_p)`` and ``(m, n_p)``, and returns the
``(n, m)`` matrix of pairwise values.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, HyperParams, _as_scheduling, validate_dataset


def rbf(p_i, p_j, sigma: float) -> float:
    """Gaussian kernel ``exp(-||p_i - p_j||^2 / sigma^2)`` for two single points."""
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    d = np.atleast_1d(np.asarray(p_i, dtype=float)) - np.atleast_1d(
        np.asarray(p_j, dtype=float))
    return float(np.exp(-np.dot(d, d) / sigma**2))


@dataclass(frozen=True)
class RBFKernel:
    sigma: float

    def __call__(self, P, Q) -> np.ndarray:
        P = _as_scheduling(P)
        Q = _as_scheduling(Q)
        sq = (np.sum(P**2, axis=1)[:, None] + np.sum(Q**2, axis=1)[None, :]
              - 2.0 * P @ Q.T)
        np.maximum(sq, 0.0, out=sq)
        if P is Q or (P.shape == Q.shape and np.array_equal(P, Q)):
            # exact ones on the diagonal despite cancellation in the expansion
            np.fill_diagonal(sq, 0.0)
        return np.exp(-sq / self.sigma**2)


def linear_kernel(P, Q) -> np.ndarray:
    """``F(p) = p``; a finite feature map used by the primal/dual checks."""
    return _as_scheduling(P) @ _as_scheduling(Q).T


def resolve_kernel(hyper: HyperParams, kernel=None):
    return RBFKernel(hyper.sigma) if kernel is None else kernel


@dataclass(frozen=True)
class GramMatrix:
    entries: np.ndarray
    n_x: int
    N: int


def _elementwise_products(d: Dataset, kernel) -> np.ndarray:
    # M[a, b] = psi(p_a, p_b) * z_a' z_b, computed once and reused for every shift
    psi = kernel(d.p, d.p)
    return psi * (np.outer(d.y, d.y) + np.outer(d.u, d.u))


def _diagonal_window_sum(M: np.ndarray, n_x: int, size: int) -> np.ndarray:
    G = np.zeros((size, size))
    for m in range(n_x):
        G += M[m:m + size, m:m + size]
    return G


def gram(d: Dataset, hyper: HyperParams, kernel=None) -> GramMatrix:
    """Unfiltered Gram matrix of the regressor rows ``phi_{n_x+1} ... phi_N``.

    Entry ``(i, j)`` (zero-based) sums ``psi(p_{i+m}, p_{j+m}) z_{i+m}' z_{j+m}``
    over ``m = 0 .. n_x-1``, where ``z_k = [y_k, u_k]``.
    """
    n_x = hyper.n_x
    validate_dataset(d, n_x)
    M = _elementwise_products(d, resolve_kernel(hyper, kernel))
    return GramMatrix(_diagonal_window_sum(M, n_x, d.N - n_x), n_x, d.N)


def extended_gram(d: Dataset, hyper: HyperParams, kernel=None) -> GramMatrix:
    """Gram matrix with ``n_x - 1`` leading partial regressor rows prepended.

    The extra rows correspond to regressors ``phi_2 ... phi_{n_x}``, whose
    pre-sample entries are zero. The result is ``(N-1) x (N-1)`` and its
    trailing ``(N-n_x) x (N-n_x)`` block equals :func:`gram`. Filtering this
    matrix with zero initial conditions and keeping the trailing block gives
    the Gram matrix of the time-filtered regressor, consistent with filtering
    each scheduling-weighted signal once from the first sample.
    """
    n_x = hyper.n_x
    validate_dataset(d, n_x)
    M = _elementwise_products(d, resolve_kernel(hyper, kernel))
    pad = n_x - 1
    Mp = np.zeros((d.N + pad, d.N + pad))
    Mp[pad:, pad:] = M
    return GramMatrix(_diagonal_window_sum(Mp, n_x, d.N - 1), n_x, d.N)


def kernel_sequences(pbar, d: Dataset, sigma: float | None = None, kernel=None):
    """Products ``psi(pbar, p_k) y_k`` and ``psi(pbar, p_k) u_k`` for k = 1..N-1.

    ``pbar`` may be a single scheduling point or an ``(M, n_p)`` batch; in the
    batch case both outputs have shape ``(M, N-1)``.
    """
    if kernel is None:
        if sigma is None:
            raise ValueError("either sigma or kernel is required")
        kernel = RBFKernel(sigma)
    pb = np.asarray(pbar, dtype=float)
    single = pb.ndim == 0 or (pb.ndim == 1 and d.n_p > 1 and pb.size == d.n_p)
    if single:
        pb = pb.reshape(1, -1)
    w = kernel(_as_scheduling(pb), d.p[:-1])
    sy = w * d.y[:-1]
    su = w * d.u[:-1]
    if single:
        return sy[0], su[0]
    return sy, su
