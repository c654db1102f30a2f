"""Local inverse problem on a sheaf: endpoint coefficients, two spectra,
two-spectra inversion, potential recovery and endpoint functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import (
    DegenerateMultiplier,
    InputError,
    InsufficientSamples,
    RankDeficient,
    RootCountShort,
)
from .nsbf import (
    _signs,
    build_nonvanishing_f,
    coefficients_from_f,
    even_odd_bessel,
    phi_prime_sum,
    phi_sum,
    recover_q_from_g0,
    smooth_fit,
    s_prime_sum,
    s_sum,
)
from .quadrature import cumulative_nc6

TYPE2_MODES = ("none", "all")


@dataclass(frozen=True)
class SolverConfig:
    N: int = 9
    Nc: int | None = None
    KD: int = 100
    KN: int = 100
    xm_points: int = 200
    rcond: float = 1e-12
    use_type2: str = "none"
    tau_max: float = 10.0
    grid_points: int = 2001
    smoothing: str = "savgol"
    smoothing_window: int = 21
    smoothing_order: int = 6
    fit_degree: int | None = None
    interior_boundary: str = "solve"
    row_weight: float = 1.0
    flat_start: bool = False
    drop_threshold: float = 1e-12

    def __post_init__(self):
        if self.N < 0:
            raise InputError("N must be non-negative")
        if self.use_type2 not in TYPE2_MODES:
            raise InputError(f"use_type2 must be one of {TYPE2_MODES}")
        if self.nc > self.N + 5:
            raise InputError(f"Nc={self.nc} exceeds N + 5")
        if self.KN < 2 * (self.nc + 1):
            raise InputError(f"KN={self.KN} is below 2(Nc+1)={2 * (self.nc + 1)}")
        if self.KD < self.N + 1:
            raise InputError(f"KD={self.KD} is below N+1={self.N + 1}")
        if self.xm_points < 8:
            raise InputError("xm_points must be at least 8")
        if self.interior_boundary not in ("solve", "attach"):
            raise InputError("interior_boundary must be 'solve' or 'attach'")
        if self.smoothing not in ("savgol", "chebyshev"):
            raise InputError("smoothing must be 'savgol' or 'chebyshev'")
        if self.smoothing_window < 3 or self.smoothing_window % 2 == 0:
            raise InputError("smoothing_window must be an odd integer >= 3")

    @property
    def nc(self) -> int:
        return self.N if self.Nc is None else self.Nc

    def min_samples(self, m1: int) -> int:
        if self.use_type2 == "all" and m1 > 1:
            return math.ceil((m1 + 1) * (self.N + 1) / (m1 - 1))
        return 3 * (self.N + 1)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__} | {"Nc": self.nc}


def _lstsq(A: np.ndarray, b: np.ndarray, rcond: float, what: str):
    """Column-equilibrated SVD least squares with a relative singular-value cutoff."""
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise RankDeficient(f"{what}: non-finite entries", condition=math.inf)
    scale = np.linalg.norm(A, axis=0)
    scale[scale == 0] = 1.0
    As = A / scale
    try:
        U, sv, Vt = np.linalg.svd(As, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise RankDeficient(f"{what}: {exc}", condition=math.inf) from exc
    if sv[0] == 0 or not np.all(np.isfinite(sv)):
        raise RankDeficient(f"{what}: zero or non-finite system", condition=math.inf)
    keep = sv > rcond * sv[0]
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    y = Vt[keep].T @ ((U[:, keep].T @ b) / sv[keep])
    x = y / scale
    residual = float(np.linalg.norm(A @ x - b))
    return x, residual, cond, int(keep.sum())


def _realify(A: np.ndarray, b: np.ndarray):
    """Split complex equations with real unknowns into real and imaginary rows."""
    return np.vstack([A.real, A.imag]), np.concatenate([b.real, b.imag])


@dataclass(frozen=True)
class EndpointCoefficients:
    """g_{i,n}(L_i), s_{j,n}(L_j) from the Weyl data of one sheaf leaf edge."""

    i: int
    g: np.ndarray
    s: dict  # local leaf position -> s_{j,n}(L_j)
    residual: float
    condition: float
    rank: int
    rows: int

    @property
    def s_own(self) -> np.ndarray:
        return self.s[self.i]


def solve_endpoint_coeffs(M: np.ndarray, rho: np.ndarray, lengths, i: int,
                          cfg: SolverConfig = SolverConfig()) -> EndpointCoefficients:
    """Least-squares solve for the endpoint coefficients of leaf edge ``i``.

    ``M`` has shape (K, m1, m1) and holds the Weyl-matrix block of the sheaf
    leaves; ``lengths[j]`` is the length of the j-th sheaf edge.  With one
    leaf edge only (a single interval) the partner term drops out.
    """
    M = np.asarray(M, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    K, m1, _ = M.shape
    lengths = [float(v) for v in lengths]
    if len(lengths) != m1 or not 0 <= i < m1:
        raise InputError("lengths and index must match the sheaf size")
    need = cfg.min_samples(m1)
    if K < need:
        raise InsufficientSamples(f"{K} samples available, at least {need} needed")
    n1 = cfg.N + 1
    sg = _signs(n1)
    je, jo = {}, {}
    for j, L in enumerate(lengths):
        e, o = even_odd_bessel(n1, rho * L)
        je[j], jo[j] = (sg[:, None] * e).T, (sg[:, None] * o).T  # (K, n1)

    if cfg.use_type2 == "all" and m1 > 2:
        unknown_s = list(range(m1))
    elif m1 > 1:
        unknown_s = [i, (i + 1) % m1]
    else:
        unknown_s = [i]
    col = {j: n1 * (1 + p) for p, j in enumerate(unknown_s)}
    ncols = n1 * (1 + len(unknown_s))

    def type1():
        A = np.zeros((K, ncols), dtype=complex)
        Li = lengths[i]
        A[:, :n1] = rho[:, None] * je[i]
        A[:, col[i]:col[i] + n1] = M[:, i, i, None] * jo[i]
        b = -rho * np.cos(rho * Li) - M[:, i, i] * np.sin(rho * Li)
        if m1 > 1:
            p = (i + 1) % m1
            A[:, col[p]:col[p] + n1] -= M[:, i, p, None] * jo[p]
            b = b + M[:, i, p] * np.sin(rho * lengths[p])
        return A, b

    blocks = [type1()]
    if cfg.use_type2 == "all" and m1 > 2:
        for j in range(m1):
            p = (j + 1) % m1
            if j == i or p == i:
                continue
            A = np.zeros((K, ncols), dtype=complex)
            A[:, col[j]:col[j] + n1] = M[:, i, j, None] * jo[j]
            A[:, col[p]:col[p] + n1] -= M[:, i, p, None] * jo[p]
            b = M[:, i, p] * np.sin(rho * lengths[p]) - M[:, i, j] * np.sin(rho * lengths[j])
            blocks.append((A, b))
    A = np.vstack([a for a, _ in blocks])
    b = np.concatenate([v for _, v in blocks])
    # rows grow like |rho| (and |M| ~ |rho|); weight to balance low and high rho
    w = np.maximum(1.0, np.abs(np.tile(rho, len(blocks)))) ** -cfg.row_weight
    A, b = _realify(A * w[:, None], b * w)
    x, res, cond, rank = _lstsq(A, b, cfg.rcond, f"endpoint system for leaf edge {i}")
    s = {j: x[col[j]:col[j] + n1] for j in unknown_s}
    return EndpointCoefficients(i, x[:n1], s, res, cond, rank, A.shape[0])


def phi_end(g, rho, L):
    """phi_N(rho, L) from endpoint coefficients (real rho gives real values)."""
    return phi_sum(np.asarray(g), np.atleast_1d(rho), L)


def s_end(s, rho, L):
    return s_sum(np.asarray(s), np.atleast_1d(rho), L)


def _roots_of(func, grid: np.ndarray, xtol: float) -> list:
    vals = func(grid)
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(lambda r: float(func(np.array([r]))[0]), a, b, xtol=xtol, rtol=1e-15))
    return roots


@dataclass(frozen=True)
class Spectra:
    mu: np.ndarray  # complex: positive reals, or i*tau for a negative eigenvalue
    nu: np.ndarray

    @property
    def lambda_D(self) -> np.ndarray:
        return (self.mu**2).real

    @property
    def lambda_N(self) -> np.ndarray:
        return (self.nu**2).real


def extract_spectra(g_end, s_end_, L: float, cfg: SolverConfig = SolverConfig(),
                    KD: int | None = None, KN: int | None = None) -> Spectra:
    """Zeros of S_N(rho, L) (Dirichlet-Dirichlet) and phi_N(rho, L) (Neumann-Dirichlet)."""
    KD = cfg.KD if KD is None else KD
    KN = cfg.KN if KN is None else KN
    rho_max = (max(KD, KN) + 2) * np.pi / L
    step = np.pi / (4 * L)
    n_scan = int(np.ceil(rho_max / step)) * 4
    grid = np.linspace(0.0, rho_max, n_scan + 1)[1:]
    grid = np.concatenate([[1e-8], grid])
    taus = np.linspace(1e-8, cfg.tau_max, 400)[::-1]

    def real_part(f):
        return lambda r: f(r).real

    sD = real_part(lambda r: s_end(s_end_, r, L))
    sN = real_part(lambda r: phi_end(g_end, r, L))
    out = []
    for func, count, name in ((sD, KD, "Dirichlet-Dirichlet"), (sN, KN, "Neumann-Dirichlet")):
        neg = _roots_of(lambda t, f=func: f(1j * np.asarray(t)), taus[::-1], 1e-13)
        pos = _roots_of(func, grid, 1e-13 * rho_max)
        roots = [1j * t for t in sorted(neg, reverse=True)] + sorted(pos)
        if len(roots) < count:
            raise RootCountShort(f"{name}: found {len(roots)} roots below {rho_max:.3f}, need {count}")
        out.append(np.asarray(roots[:count], dtype=complex))
    return Spectra(*out)


def solve_t0(mu, L: float, cfg: SolverConfig = SolverConfig()):
    """t_n(0), n = 0..N, from T(mu_k, 0) = 0 at the Dirichlet-Dirichlet roots."""
    mu = np.asarray(mu, dtype=complex)
    n1 = cfg.N + 1
    if mu.size < n1:
        raise InsufficientSamples(f"{mu.size} Dirichlet roots, need at least {n1}")
    _, jo = even_odd_bessel(n1, mu * L)
    A = (_signs(n1)[:, None] * jo).T
    b = -np.sin(mu * L)
    A, b = _realify(A, b)
    x, res, cond, _ = _lstsq(A, b, cfg.rcond, "t0 system")
    return x, res, cond


def multipliers(nu, t0, L: float) -> np.ndarray:
    """beta_k with 1/beta_k = T_N(nu_k, 0)."""
    nu = np.asarray(nu, dtype=complex)
    inv = s_sum(np.asarray(t0), nu, -L)
    if np.any(np.abs(inv) < 1e-12):
        k = int(np.argmin(np.abs(inv)))
        raise DegenerateMultiplier(f"T_N(nu_{k + 1}, 0) = {inv[k]:.3e} is numerically zero")
    return (1.0 / inv).real if np.all(np.abs(inv.imag) <= 1e-9 * np.abs(inv)) else 1.0 / inv


@dataclass(frozen=True)
class InteriorSolution:
    """g_n(x) and t_n(x) on a grid of [0, L] including both endpoints."""

    x: np.ndarray
    g: np.ndarray  # (Nc + 1, len(x))
    t: np.ndarray
    residuals: np.ndarray
    conditions: np.ndarray

    @property
    def g0(self) -> np.ndarray:
        return self.g[0]

    @property
    def t0(self) -> np.ndarray:
        return self.t[0]


def interior_solve(nu, beta, L: float, cfg: SolverConfig = SolverConfig(),
                   g_end=None, t_start=None) -> InteriorSolution:
    """Per-point least squares for g_n(x_m), t_n(x_m) from phi(nu_k, .) = beta_k T(nu_k, .).

    The grid is ``xm_points`` uniform interior points plus both endpoints.
    With ``interior_boundary="solve"`` the system is solved at x = 0 and
    x = L as well (the columns that vanish there drop out through the
    singular-value cutoff), so boundary values carry the same error as
    their neighbours.  With ``"attach"`` they are set from g_n(0) = 0,
    t_n(L) = 0, ``g_end`` and ``t_start``.
    """
    nu = np.asarray(nu, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    n1 = cfg.nc + 1
    if nu.size < 2 * n1:
        raise InsufficientSamples(f"{nu.size} Neumann-Dirichlet roots, need at least {2 * n1}")
    M = cfg.xm_points
    x = L * np.arange(M + 2) / (M + 1)
    sg = _signs(n1)
    ratio = beta / nu
    g = np.zeros((n1, M + 2))
    t = np.zeros((n1, M + 2))
    res = np.zeros(M + 2)
    cond = np.zeros(M + 2)
    solve_ends = cfg.interior_boundary == "solve"
    for p, xv in enumerate(x):
        if not solve_ends and p in (0, M + 1):
            continue
        je, _ = even_odd_bessel(n1, nu * xv)
        _, jo = even_odd_bessel(n1, nu * (xv - L))
        A = np.hstack([(sg[:, None] * je).T, -ratio[:, None] * (sg[:, None] * jo).T])
        b = ratio * np.sin(nu * (xv - L)) - np.cos(nu * xv)
        Ar, br = _realify(A, b)
        try:
            sol, res[p], cond[p], _ = _lstsq(Ar, br, cfg.rcond, f"interior system at x={xv:.6g}")
        except RankDeficient as exc:
            raise RankDeficient(f"interior system at x={xv:.6g}: {exc}", exc.condition) from exc
        g[:, p] = sol[:n1]
        t[:, p] = sol[n1:]
    if solve_ends:
        g[1:, 0] = 0.0
        t[:, -1] = 0.0
    else:
        if g_end is not None:
            k = min(n1, len(g_end))
            g[:k, -1] = np.asarray(g_end)[:k]
        else:
            g[:, -1] = 2 * g[:, -2] - g[:, -3]
        if t_start is not None:
            k = min(n1, len(t_start))
            t[:k, 0] = np.asarray(t_start)[:k]
        else:
            t[:, 0] = 2 * t[:, 1] - t[:, 2]
    return InteriorSolution(x, g, t, res, cond)


@dataclass(frozen=True)
class TwoSpectraData:
    edge: object
    mu: np.ndarray
    nu: np.ndarray
    t0: np.ndarray
    beta: np.ndarray


@dataclass(frozen=True)
class EdgeRecovery:
    """Everything the local solver learned about one leaf edge (leaf at x = 0)."""

    edge: object
    length: float
    endpoint: EndpointCoefficients
    spectra: TwoSpectraData
    interior: InteriorSolution
    x: np.ndarray
    q: np.ndarray
    g0_fit: object = field(repr=False, default=None)
    t0_fit: object = field(repr=False, default=None)

    def report(self) -> dict:
        return {
            "edge": self.edge,
            "length": self.length,
            "endpoint_residual": self.endpoint.residual,
            "endpoint_condition": self.endpoint.condition,
            "roots_D": int(self.spectra.mu.size),
            "roots_N": int(self.spectra.nu.size),
            "interior_condition_max": float(self.interior.conditions.max()),
        }


def recover_edge_potential(x, g0, cfg: SolverConfig = SolverConfig()):
    """q on the grid ``x`` from g_0."""
    return recover_q_from_g0(x, g0, cfg.smoothing, cfg.smoothing_window, cfg.smoothing_order,
                             cfg.fit_degree, flat_start=cfg.flat_start)


def solve_edge(M, rho, lengths, i: int, edge=None, cfg: SolverConfig = SolverConfig()) -> EdgeRecovery:
    """Full local chain for sheaf leaf edge ``i``: endpoint coefficients,
    two spectra, t_n(0), multipliers, interior system and q."""
    L = float(lengths[i])
    ec = solve_endpoint_coeffs(M, rho, lengths, i, cfg)
    sp = extract_spectra(ec.g, ec.s_own, L, cfg)
    t0, _, _ = solve_t0(sp.mu, L, cfg)
    beta = multipliers(sp.nu, t0, L)
    inner = interior_solve(sp.nu, beta, L, cfg, g_end=ec.g, t_start=t0)
    q = recover_edge_potential(inner.x, inner.g0, cfg)
    g_fit = smooth_fit(inner.x, inner.g0, cfg.fit_degree)
    t_fit = smooth_fit(inner.x, inner.t0, cfg.fit_degree)
    return EdgeRecovery(edge, L, ec, TwoSpectraData(edge, sp.mu, sp.nu, t0, beta), inner,
                        inner.x, q, g_fit, t_fit)


@dataclass(frozen=True)
class EndpointFunctions:
    """phi, S, phi', S' at x = L for each rho (the data consumed by peeling)."""

    phi: np.ndarray
    S: np.ndarray
    dphi: np.ndarray
    dS: np.ndarray

    def wronskian(self) -> np.ndarray:
        return self.phi * self.dS - self.dphi * self.S


def endpoint_functions(rec: EdgeRecovery, rho, cfg: SolverConfig = SolverConfig(),
                       n_terms: int | None = None) -> EndpointFunctions:
    """phi(rho, L), S(rho, L) and derivatives from the recovered g_0, t_0, q.

    Builds the nonvanishing solution f from phi(0, x) = g_0 + 1 and
    T(0, x) = (x - L)(t_0/3 + 1) on a dense uniform grid and runs the
    recurrent integration for the NSBF coefficients at L.
    """
    L = rec.length
    G = cfg.grid_points
    x = np.linspace(0.0, L, G)
    g_fit, t_fit = rec.g0_fit, rec.t0_fit
    phi0 = g_fit(x) + 1.0
    dphi0 = g_fit.deriv()(x)
    t0 = t_fit(x)
    T0 = (x - L) * (t0 / 3.0 + 1.0)
    dT0 = t0 / 3.0 + 1.0 + (x - L) * t_fit.deriv()(x) / 3.0
    phi0[0], dphi0[0] = 1.0, 0.0
    q = np.interp(x, rec.x, rec.q)
    q_int = cumulative_nc6(q, x[1] - x[0])
    state = build_nonvanishing_f(x, phi0, T0, q_int, dphi0, dT0)
    coeffs = coefficients_from_f(state, n_terms or cfg.N + 1, edge=rec.edge)
    c = coeffs.at(L)
    rho = np.asarray(rho, dtype=complex)
    h = coeffs.h
    S = s_sum(c["s"], rho, L)
    dS = s_prime_sum(c["sigma"], c["q_int"], rho, L)
    phi = phi_sum(c["g"], rho, L) - h * S
    dphi = phi_prime_sum(c["gamma"], c["q_int"], rho, L, h) - h * dS
    return EndpointFunctions(phi, S, dphi, dS)
