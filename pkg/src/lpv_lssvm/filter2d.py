"""Predictor-pole filtering.

The predictor poles act as a causal IIR filter ``q^n / alpha(q)``, i.e.

    out[k] = x[k] - alpha_1 out[k-1] - ... - alpha_n out[k-n]

with zero initial conditions. Applying it along both axes of a Gram matrix
gives the separable-denominator 2D filter used by the estimator.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .core import AlphaPolynomial
from .kernels import GramMatrix


class CutoffOutOfRange(ValueError):
    pass


def butterworth_alpha(omega_c: float, Ts: float, n_x: int) -> AlphaPolynomial:
    """Predictor polynomial whose roots are discretized Butterworth poles.

    The analog poles ``omega_c * exp(j*pi*(2m + n_x - 1) / (2 n_x))``,
    ``m = 1..n_x``, lie in the left half plane and are mapped with
    ``z = exp(s * Ts)``.

    Parameters
    ----------
    omega_c : float
        Cutoff frequency in rad/s, strictly between 0 and the Nyquist
        frequency ``pi / Ts``.
    Ts : float
        Sampling period in seconds.
    n_x : int
        Number of poles.
    """
    if n_x < 1:
        raise ValueError("n_x must be >= 1")
    if not (Ts > 0 and 0 < omega_c * Ts < np.pi):
        raise CutoffOutOfRange(
            f"cutoff {omega_c} rad/s is outside (0, pi/Ts) with Ts = {Ts}")
    m = np.arange(1, n_x + 1)
    s = omega_c * np.exp(1j * np.pi * (2 * m + n_x - 1) / (2 * n_x))
    return AlphaPolynomial.from_roots(np.exp(s * Ts))


def iir_filter_1d(alpha: AlphaPolynomial, x, axis: int = -1) -> np.ndarray:
    """Filter ``x`` with ``q^n / alpha(q)`` along ``axis`` (zero initial state)."""
    x = np.asarray(x, dtype=float)
    if alpha.is_origin():
        return x.copy()
    return lfilter([1.0], np.r_[1.0, alpha.coeffs], x, axis=axis)


@dataclass(frozen=True)
class FilteredGram:
    entries: np.ndarray
    alpha: AlphaPolynomial


def filter_gram_2d(alpha: AlphaPolynomial, g: GramMatrix | np.ndarray) -> FilteredGram:
    """Apply the predictor filter down every column and then along every row."""
    G = g.entries if isinstance(g, GramMatrix) else np.asarray(g, dtype=float)
    K = iir_filter_1d(alpha, iir_filter_1d(alpha, G, axis=0), axis=1)
    return FilteredGram(K, alpha)
