"""Cumulative quadrature on uniform grids."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

_WIDTH = 6


@lru_cache(maxsize=None)
def _interval_weights(width: int = _WIDTH) -> np.ndarray:
    """w[p, j]: integral over [p, p+1] of the j-th Lagrange basis on nodes 0..width-1."""
    nodes = np.arange(width, dtype=float)
    w = np.empty((width - 1, width))
    for j in range(width):
        others = np.delete(nodes, j)
        basis = np.poly1d(others, r=True) / np.prod(nodes[j] - others)
        anti = basis.integ()
        for p in range(width - 1):
            w[p, j] = anti(p + 1) - anti(p)
    return w


def cumulative_nc6(y: np.ndarray, h: float) -> np.ndarray:
    """Running integral of samples ``y`` (last axis) on a uniform grid of step ``h``.

    Each subinterval is integrated with the degree-5 interpolant through
    six neighbouring nodes (centered where possible), so the result is
    sixth-order accurate and starts at 0.
    """
    y = np.asarray(y)
    n = y.shape[-1]
    if n < _WIDTH:
        from scipy.integrate import cumulative_trapezoid

        return cumulative_trapezoid(y, dx=h, initial=0.0, axis=-1)
    w = _interval_weights()
    pieces = np.empty(y.shape[:-1] + (n - 1,), dtype=np.result_type(y, float))
    # interior intervals k use nodes k-2..k+3 (position 2 in the window)
    k0, k1 = 2, n - 3
    if k1 > k0:
        acc = 0
        for j in range(_WIDTH):
            acc = acc + w[2, j] * y[..., k0 - 2 + j : k1 - 2 + j]
        pieces[..., k0:k1] = acc
    for k in list(range(0, min(k0, n - 1))) + list(range(max(k1, k0), n - 1)):
        start = min(max(k - 2, 0), n - _WIDTH)
        p = k - start
        pieces[..., k] = y[..., start : start + _WIDTH] @ w[p]
    out = np.zeros(y.shape, dtype=pieces.dtype)
    out[..., 1:] = np.cumsum(pieces, axis=-1) * h
    return out


def derivative5(y: np.ndarray, h: float) -> np.ndarray:
    """Five-point finite-difference derivative (one-sided at the ends)."""
    y = np.asarray(y)
    d = np.empty_like(y)
    d[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)
    d[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * h)
    d[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12 * h)
    d[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / (12 * h)
    d[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / (12 * h)
    return d
