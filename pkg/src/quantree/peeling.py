"""Weyl matrix of the reduced tree after removing a sheaf's leaf edges."""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InputError, SmallDenominator
from .forward import WeylSamples
from .graph import Sheaf


@dataclass(frozen=True)
class PeelInput:
    """Weyl samples, the sheaf, and phi, S, phi', S' at L_j for each sheaf leaf.

    ``tables`` maps a sheaf leaf to an object with ``phi``, ``S``, ``dphi``,
    ``dS`` arrays of length K (leaf at x = 0, values at the abscission vertex).
    """

    samples: WeylSamples
    sheaf: Sheaf
    tables: dict

    def __post_init__(self):
        missing = [v for v in self.sheaf.leaves if v not in self.tables]
        if missing:
            raise InputError(f"endpoint functions missing for sheaf leaves {missing!r}")
        for v in self.sheaf.leaves:
            t = self.tables[v]
            for name in ("phi", "S", "dphi", "dS"):
                if np.shape(getattr(t, name)) != (self.samples.K,):
                    raise InputError(f"endpoint table {name} of leaf {v!r} must have length K")


@dataclass(frozen=True)
class PeelResult:
    samples: WeylSamples
    dropped: tuple
    pivot: object


def samples_hash(samples: WeylSamples) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(samples.rho).tobytes())
    h.update(np.ascontiguousarray(samples.M).tobytes())
    h.update(repr(samples.leaves).encode())
    return h.hexdigest()[:16]


def choose_pivot(inp: PeelInput):
    """Sheaf leaf with the largest mean |phi + M_ii S| at the abscission vertex."""
    best, best_val = None, -1.0
    for v in inp.sheaf.leaves:
        i = inp.samples.leaves.index(v)
        t = inp.tables[v]
        val = float(np.mean(np.abs(t.phi + inp.samples.M[:, i, i] * t.S)))
        if val > best_val:
            best, best_val = v, val
    return best


def peel(inp: PeelInput, drop_threshold: float = 1e-12, pivot=None, strict: bool = False) -> PeelResult:
    """Reduced Weyl matrices, rows/columns ordered [v0, remaining leaves...].

    Sample points whose pivot denominator is below ``drop_threshold`` times
    its own scale are dropped (or raise SmallDenominator when ``strict``).
    """
    smp, sheaf = inp.samples, inp.sheaf
    leaves = smp.leaves
    pivot = choose_pivot(inp) if pivot is None else pivot
    if pivot not in sheaf.leaves:
        raise InputError(f"pivot {pivot!r} is not a sheaf leaf")
    p = leaves.index(pivot)
    sheaf_idx = [leaves.index(v) for v in sheaf.leaves]
    rest = [k for k, v in enumerate(leaves) if v not in sheaf.leaves]
    M = smp.M
    tp = inp.tables[pivot]

    denom = tp.phi + M[:, p, p] * tp.S
    scale = np.abs(tp.phi) + np.abs(M[:, p, p] * tp.S)
    bad = np.flatnonzero(~(np.abs(denom) > drop_threshold * scale))
    if bad.size:
        msg = f"pivot denominator below threshold at rho indices {bad.tolist()}"
        if strict:
            raise SmallDenominator(msg, bad)
        warnings.warn(msg + "; dropping them", RuntimeWarning, stacklevel=2)

    # sum over sheaf leaves j of M_{ij} S_j'(L_j), for every row i
    flux = sum(M[:, :, j] * inp.tables[v].dS[:, None] for v, j in zip(sheaf.leaves, sheaf_idx))
    # Kirchhoff at v0 for w_pivot: phi_p' + sum_j M_pj S_j' is the stem derivative
    m00 = (tp.dphi + flux[:, p]) / denom
    r = len(rest) + 1
    out = np.empty((smp.K, r, r), dtype=complex)
    out[:, 0, 0] = m00
    if rest:
        rest = np.array(rest)
        m0i = M[:, p, rest] / denom[:, None]
        c = M[:, rest, p] * tp.S[:, None]  # w_i(v0) for each remaining leaf i
        out[:, 0, 1:] = m0i
        out[:, 1:, 0] = flux[:, rest] - c * m00[:, None]
        out[:, 1:, 1:] = M[:, rest][:, :, rest] - c[:, :, None] * m0i[:, None, :]
    keep = np.setdiff1d(np.arange(smp.K), bad)
    new_leaves = (sheaf.abscission,) + tuple(leaves[k] for k in (rest if len(rest) else []))
    reduced = WeylSamples(smp.rho[keep], out[keep], new_leaves)
    return PeelResult(reduced, tuple(int(k) for k in bad), pivot)
