"""Neumann series of Bessel functions (NSBF) for -y'' + q y = rho^2 y.

Partial sums for the fundamental solutions phi, S, their x-derivatives and
the solution T normalized at the right endpoint, the recurrent integration
procedure that produces the coefficient functions from a nonvanishing
solution of the lambda = 0 equation, and recovery of q from the first
coefficient of phi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.signal import savgol_filter

from .bessel import sph_jn_all
from .errors import DenominatorNearZero, VanishingF, XOutOfRange
from .quadrature import cumulative_nc6, derivative5

WHICH = ("phi", "S", "phi_prime", "S_prime", "T")


def _signs(n: int) -> np.ndarray:
    return (-1.0) ** np.arange(n)


def even_odd_bessel(n_terms: int, z):
    """j_{2n}(z) and j_{2n+1}(z) for n < n_terms; each (n_terms,) + z.shape."""
    jj = sph_jn_all(2 * n_terms - 1, z)
    return jj[0::2], jj[1::2]


def sin_over_rho(rho, x):
    z = np.asarray(rho, dtype=complex) * x
    zero = z == 0
    safe = np.where(zero, 1.0, z)
    return np.where(zero, x, x * np.sin(safe) / safe)


def odd_over_rho(j_odd, rho, x):
    """j_{2n+1}(rho x) / rho for each row n, with the rho -> 0 limit."""
    z = np.asarray(rho, dtype=complex) * x
    zero = z == 0
    safe = np.where(zero, 1.0, z)
    out = j_odd * (x / safe)
    if np.any(zero):
        lim = np.zeros(j_odd.shape[0])
        lim[0] = x / 3.0
        out = np.where(zero, lim.reshape((-1,) + (1,) * z.ndim), out)
    return out


def phi_sum(g, rho, x):
    """cos(rho x) + sum (-1)^n g_n j_{2n}(rho x)."""
    g = np.asarray(g)
    rho = np.asarray(rho, dtype=complex)
    je, _ = even_odd_bessel(g.shape[0], rho * x)
    return np.cos(rho * x) + np.tensordot(_signs(g.shape[0]) * g, je, axes=(0, 0))


def s_sum(s, rho, x):
    """sin(rho x)/rho + (1/rho) sum (-1)^n s_n j_{2n+1}(rho x)."""
    s = np.asarray(s)
    rho = np.asarray(rho, dtype=complex)
    _, jo = even_odd_bessel(s.shape[0], rho * x)
    return sin_over_rho(rho, x) + np.tensordot(_signs(s.shape[0]) * s, odd_over_rho(jo, rho, x), axes=(0, 0))


def phi_prime_sum(gamma, q_int, rho, x, h=0.0):
    """-rho sin + cos (Q/2 + h) + sum (-1)^n gamma_n j_{2n}(rho x)."""
    gamma = np.asarray(gamma)
    rho = np.asarray(rho, dtype=complex)
    je, _ = even_odd_bessel(gamma.shape[0], rho * x)
    z = rho * x
    return (-rho * np.sin(z) + np.cos(z) * (0.5 * q_int + h)
            + np.tensordot(_signs(gamma.shape[0]) * gamma, je, axes=(0, 0)))


def s_prime_sum(sigma, q_int, rho, x):
    """cos + sin Q/(2 rho) + (1/rho) sum (-1)^n sigma_n j_{2n+1}(rho x)."""
    sigma = np.asarray(sigma)
    rho = np.asarray(rho, dtype=complex)
    _, jo = even_odd_bessel(sigma.shape[0], rho * x)
    return (np.cos(rho * x) + 0.5 * q_int * sin_over_rho(rho, x)
            + np.tensordot(_signs(sigma.shape[0]) * sigma, odd_over_rho(jo, rho, x), axes=(0, 0)))


def t_sum(t, rho, x, length):
    """Series for T (T(L) = 0, T'(L) = 1): argument rho (x - L)."""
    return s_sum(t, rho, x - length)


@dataclass(frozen=True)
class NSBFCoefficientSet:
    """Coefficient functions on a uniform grid of [0, L] (or a single point).

    ``g``/``gamma`` belong to phi_h (phi_h(0) = 1, phi_h'(0) = h); with
    ``h = 0`` they are the coefficients of phi itself.  ``s``/``sigma``
    belong to S.  ``t`` (optional) belongs to T.  Arrays have shape
    ``(N + 1, len(x))``.
    """

    x: np.ndarray
    length: float
    g: np.ndarray
    s: np.ndarray
    gamma: np.ndarray | None = None
    sigma: np.ndarray | None = None
    q_int: np.ndarray | None = None
    t: np.ndarray | None = None
    h: complex = 0.0
    edge: object = None

    @property
    def order(self) -> int:
        return self.g.shape[0] - 1

    def truncated(self, n_terms: int) -> "NSBFCoefficientSet":
        cut = lambda a: None if a is None else a[:n_terms]  # noqa: E731
        return NSBFCoefficientSet(self.x, self.length, cut(self.g), cut(self.s), cut(self.gamma),
                                  cut(self.sigma), self.q_int, cut(self.t), self.h, self.edge)

    def at(self, x: float) -> dict:
        """Coefficient vectors at a grid node (or interpolated between nodes)."""
        if x < -1e-12 * self.length or x > self.length * (1 + 1e-12):
            raise XOutOfRange(f"x={x} outside [0, {self.length}]")
        grid = np.atleast_1d(self.x)
        k = int(np.argmin(np.abs(grid - x)))
        exact = abs(grid[k] - x) <= 1e-12 * max(self.length, 1.0)

        def pick(a):
            if a is None:
                return None
            a = np.asarray(a)
            if exact:
                return a[..., k]
            from scipy.interpolate import CubicSpline

            return CubicSpline(grid, a, axis=-1)(x)

        return {
            "g": pick(self.g), "s": pick(self.s), "gamma": pick(self.gamma),
            "sigma": pick(self.sigma), "t": pick(self.t),
            "q_int": pick(self.q_int),
        }


def eval_series(coeffs: NSBFCoefficientSet, which: str, rho, x: float):
    """Truncated NSBF value of phi, S, phi', S' or T at (rho, x)."""
    if which not in WHICH:
        raise ValueError(f"which must be one of {WHICH}")
    c = coeffs.at(x)
    h = coeffs.h
    if which == "S":
        return s_sum(c["s"], rho, x)
    if which == "phi":
        val = phi_sum(c["g"], rho, x)
        return val - h * s_sum(c["s"], rho, x) if h != 0 else val
    if which == "S_prime":
        return s_prime_sum(c["sigma"], c["q_int"], rho, x)
    if which == "phi_prime":
        val = phi_prime_sum(c["gamma"], c["q_int"], rho, x, h)
        return val - h * s_prime_sum(c["sigma"], c["q_int"], rho, x) if h != 0 else val
    if c["t"] is None:
        raise ValueError("coefficient set carries no T coefficients")
    return t_sum(c["t"], rho, x, coeffs.length)


@dataclass(frozen=True)
class RecurrenceState:
    """Nonvanishing solution f of f'' = q f with f(0) = 1, on a uniform grid."""

    x: np.ndarray
    f: np.ndarray
    df: np.ndarray
    h: complex
    q_int: np.ndarray

    @property
    def length(self) -> float:
        return float(self.x[-1])


def abel_partner(x, phi0):
    """psi = phi0 * int_0^x dt / phi0(t)^2, the solution with psi(0)=0, psi'(0)=1."""
    return phi0 * cumulative_nc6(1.0 / phi0**2, x[1] - x[0])


def build_nonvanishing_f(x, phi0, T0, q_int, dphi0=None, dT0=None, threshold: float = 1e-8) -> RecurrenceState:
    """f proportional to phi(0, .) + i T(0, .) (or phi(0, .) + i psi when
    phi(0, L) ~ 0), scaled so that f(0) = 1.

    Derivatives, when not supplied, come from five-point differences.
    """
    x = np.asarray(x, dtype=float)
    phi0 = np.asarray(phi0, dtype=complex)
    T0 = np.asarray(T0, dtype=complex)
    dx = x[1] - x[0]
    if abs(phi0[0] - 1.0) > 1e-8:
        raise ValueError("phi(0, 0) must equal 1")
    dphi0 = derivative5(phi0, dx) if dphi0 is None else np.asarray(dphi0, dtype=complex)
    if abs(phi0[-1]) < threshold * (1.0 + np.abs(phi0).max()):
        if np.abs(phi0).min() < threshold:
            raise VanishingF("phi(0, x) vanishes inside the edge; Abel construction unavailable")
        partner = abel_partner(x, phi0)
        dpartner = dphi0 * partner / phi0 + 1.0 / phi0
    else:
        partner = T0
        dpartner = derivative5(T0, dx) if dT0 is None else np.asarray(dT0, dtype=complex)
    # T(0, 0) != 0 in general, so rescale to f(0) = 1
    norm = 1.0 + 1j * partner[0]
    f = (phi0 + 1j * partner) / norm
    df = (dphi0 + 1j * dpartner) / norm
    if np.abs(f).min() <= 1e-12:
        raise VanishingF(f"|f| reaches {np.abs(f).min():.3e}")
    return RecurrenceState(x, f, df, complex(df[0]), np.asarray(q_int, dtype=float))


def _check_uniform(x):
    d = np.diff(x)
    if not np.allclose(d, d[0], rtol=1e-9, atol=0):
        raise ValueError("recurrence needs a uniform grid")


def beta_xi_sequences(state: RecurrenceState, n_max: int):
    """beta_n, xi_n for n = -1..n_max on the unit interval.

    The grid is mapped to [0, 1] (x = L s) before running the recurrence; the
    caller rescales derivative quantities.  Returns arrays of shape
    ``(n_max + 2, G)`` indexed by n + 1.
    """
    _check_uniform(state.x)
    L = state.length
    s = state.x / L
    ds = s[1] - s[0]
    f = state.f
    df = state.df * L
    hh = state.h * L
    qi = state.q_int * L  # int_0^s of L^2 q(L t) dt
    G = s.size
    beta = np.zeros((n_max + 2, G), dtype=complex)
    xi = np.zeros((n_max + 2, G), dtype=complex)
    beta[0] = 0.5
    xi[0] = 0.25 * qi
    if n_max >= 0:
        beta[1] = 0.5 * (f - 1.0)
        xi[1] = 0.5 * (df - hh) - 0.25 * qi
    inner = slice(1, None)
    si = s[inner]
    inv_f2 = 1.0 / f**2
    for n in range(1, n_max + 1):
        bm2 = beta[n - 1]  # beta_{n-2}
        if n == 1:
            eta_integrand = 0.5 * df
        else:
            eta_integrand = (s * df + (n - 1) * f) * bm2 * s ** (n - 2)
        eta = cumulative_nc6(eta_integrand, ds)
        theta = cumulative_nc6(inv_f2 * (eta - f * bm2 * s ** (n - 1)), ds)
        cn = 1.0 if n == 1 else 2.0 * (2 * n - 1)
        ratio = (2 * n + 1) / (2 * n - 3)
        sn = si**n
        b = np.zeros(G, dtype=complex)
        b[inner] = ratio * (bm2[inner] + cn * f[inner] * theta[inner] / sn)
        xm2 = xi[n - 1]
        x_new = np.zeros(G, dtype=complex)
        x_new[inner] = ratio * (
            xm2[inner]
            + cn * (df[inner] * theta[inner] + eta[inner] / f[inner]) / sn
            - (cn - 2 * n + 1) / si * bm2[inner]
        )
        beta[n + 1] = _quench_origin(b)
        xi[n + 1] = _quench_origin(x_new)
    return beta, xi


def _quench_origin(v: np.ndarray) -> np.ndarray:
    """Zero the roundoff blow-up of the x^-n factors next to x = 0.

    Near the origin the true coefficient sits below the rounding floor and the
    computed one grows like x^-n as x -> 0; everything left of the trough of
    |v| inside the first tenth of the grid is noise.
    """
    head = max(3, v.size // 10)
    k = 1 + int(np.argmin(np.abs(v[1:head])))
    if k > 1:
        v[1:k] = 0.0
    return v


def coefficients_from_f(state: RecurrenceState, n_terms: int, edge=None) -> NSBFCoefficientSet:
    """NSBF coefficients of phi_h, S and derivatives (n = 0..n_terms-1)."""
    n_max = 2 * n_terms - 1
    beta, xi = beta_xi_sequences(state, n_max)
    L = state.length
    b = beta[1:]  # beta_0..beta_nmax
    x_ = xi[1:]
    return NSBFCoefficientSet(
        x=state.x,
        length=L,
        g=2.0 * b[0::2],
        s=2.0 * b[1::2],
        gamma=2.0 * x_[0::2] / L,
        sigma=2.0 * x_[1::2] / L,
        q_int=state.q_int,
        h=state.h,
        edge=edge,
    )


def chebyshev_degree(n_points: int) -> int:
    """Default fit degree: about 2 sqrt(n), where equispaced least squares stays well conditioned."""
    return int(min(80, max(4, np.floor(2.0 * np.sqrt(n_points)))))


def smooth_fit(x, y, degree: int | None = None):
    """Least-squares Chebyshev fit on [0, L]; returns a numpy Chebyshev series."""
    x = np.asarray(x, dtype=float)
    if degree is None:
        degree = chebyshev_degree(x.size)
    degree = min(degree, x.size - 1)
    return C.Chebyshev.fit(x, y, degree, domain=[x[0], x[-1]])


def second_derivative(x, y, method: str = "savgol", window: int = 21, order: int = 6,
                      degree: int | None = None, flat_start: bool = False):
    """Smoothed y'' on a uniform grid.

    ``savgol`` fits a degree-``order`` polynomial on each ``window``-point
    neighbourhood (kinks of y'' stay local); ``chebyshev`` differentiates one
    global least-squares fit.  ``flat_start`` declares y(0) = y'(0) = 0,
    which the fit near x = 0 then enforces.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if method == "chebyshev":
        return smooth_fit(x, y, degree).deriv(2)(x)
    if method != "savgol":
        raise ValueError(f"unknown smoothing method {method!r}")
    _check_uniform(x)
    window = min(window, x.size if x.size % 2 else x.size - 1)
    order = min(order, window - 1)
    d2 = savgol_filter(y, window, order, deriv=2, delta=x[1] - x[0], mode="interp")
    if flat_start:
        # y(0) = y'(0) = 0: refit the leading window with the basis x^2..x^(order+1)
        half = window // 2
        xs = x[:window] - x[0]
        powers = np.arange(2, order + 2)
        A = xs[:, None] ** powers
        coef, *_ = np.linalg.lstsq(A, y[:window], rcond=None)
        xe = xs[:half]
        d2[:half] = (xe[:, None] ** (powers - 2) * powers * (powers - 1)) @ coef
    return d2


def recover_q_from_g0(x, g0, method: str = "savgol", window: int = 21, order: int = 6,
                      degree: int | None = None, flat_start: bool = False):
    """q = g0'' / (g0 + 1) with a smoothed second derivative."""
    x = np.asarray(x, dtype=float)
    g0 = np.asarray(g0, dtype=float)
    if np.abs(g0 + 1.0).min() < 1e-6:
        raise DenominatorNearZero("g0 + 1 comes within 1e-6 of zero")
    return second_derivative(x, g0, method, window, order, degree, flat_start) / (g0 + 1.0)


def recover_q_from_s0(x, s0):
    """Alternative recovery from the first S coefficient (forward cross-check only)."""
    x = np.asarray(x, dtype=float)
    fit = smooth_fit(x, x * np.asarray(s0, dtype=float))
    den = fit(x) + 3.0 * x
    with np.errstate(divide="ignore", invalid="ignore"):
        return fit.deriv(2)(x) / den
