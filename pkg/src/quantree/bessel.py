"""Spherical Bessel functions of the first kind for complex argument.

All orders ``0..kmax`` are produced at once because every NSBF partial sum
needs the whole ladder.  Three regimes:

* ``|z| < SMALL_Z``: Maclaurin series (no cancellation for small argument);
* ``|z|`` well above ``kmax``: upward recurrence from the closed forms of
  j0, j1 (stable while ``k < |z|``);
* otherwise: ratios ``j_k / j_{k-1}`` from the backward (continued-fraction)
  recurrence, chained from j0 or j1, whichever is farther from a zero.
"""

from __future__ import annotations

import numpy as np

from .errors import OrderTooLarge

MAX_ORDER = 128
SMALL_Z = 0.5
_SERIES_TERMS = 24
_CF_MARGIN = 60
_UPWARD_MARGIN = 20


def _series(kmax: int, z: np.ndarray) -> np.ndarray:
    # j_k(z) = z^k/(2k+1)!! * sum_m (-z^2/2)^m / (m! (2k+3)(2k+5)...(2k+2m+1))
    out = np.empty((kmax + 1,) + z.shape, dtype=complex)
    w = -0.5 * z * z
    lead = np.ones_like(z)
    for k in range(kmax + 1):
        if k > 0:
            lead = lead * z / (2 * k + 1)
        term = np.ones_like(z)
        acc = np.ones_like(z)
        for m in range(1, _SERIES_TERMS):
            term = term * w / (m * (2 * k + 2 * m + 1))
            acc = acc + term
        out[k] = lead * acc
    return out


def _ratios(kmax: int, z: np.ndarray, start: int) -> np.ndarray:
    """r[k] = j_k(z) / j_{k-1}(z) for k = 1..kmax via backward recurrence."""
    r = np.zeros((kmax + 2,) + z.shape, dtype=complex)
    cur = np.zeros_like(z)
    for k in range(start, 0, -1):
        cur = z / ((2 * k + 1) - z * cur)
        if k <= kmax + 1:
            r[k] = cur
    return r


def sph_jn_all(kmax: int, z) -> np.ndarray:
    """Return ``j_k(z)`` for ``k = 0..kmax``; shape ``(kmax + 1,) + z.shape``."""
    if kmax < 0:
        raise ValueError("kmax must be non-negative")
    if kmax > MAX_ORDER:
        raise OrderTooLarge(f"order {kmax} exceeds supported maximum {MAX_ORDER}")
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    z = z.reshape(-1)
    out = np.empty((kmax + 1, z.size), dtype=complex)
    az = np.abs(z)

    small = az < SMALL_Z
    if small.any():
        out[:, small] = _series(kmax, z[small])

    up = az >= kmax + _UPWARD_MARGIN
    if up.any():
        zu = z[up]
        s, c = np.sin(zu), np.cos(zu)
        out[0, up] = s / zu
        if kmax >= 1:
            prev, cur = out[0, up], (s / zu - c) / zu
            out[1, up] = cur
            for k in range(1, kmax):
                prev, cur = cur, (2 * k + 1) / zu * cur - prev
                out[k + 1, up] = cur

    mid = ~(small | up)
    if mid.any():
        zm = z[mid]
        start = kmax + _CF_MARGIN + int(np.ceil(np.abs(zm).max()))
        r = _ratios(kmax, zm, start)
        s, c = np.sin(zm), np.cos(zm)
        j0 = s / zm
        res = np.empty((kmax + 1, zm.size), dtype=complex)
        res[0] = j0
        if kmax >= 1:
            j1 = (s / zm - c) / zm
            # anchor on whichever of j0, j1 is safely away from a zero
            res[1] = np.where(np.abs(j1) >= np.abs(j0), j1, j0 * r[1])
            for k in range(2, kmax + 1):
                res[k] = res[k - 1] * r[k]
        out[:, mid] = res
    return out.reshape((kmax + 1,) + shape)


def sph_bessel_j(order: int, z):
    """Spherical Bessel function ``j_order(z)`` for complex ``z``."""
    if order < 0:
        raise ValueError("order must be non-negative")
    res = sph_jn_all(order, z)[order]
    if np.ndim(z) == 0:
        return complex(res)
    return res
