"""Direct problem: fundamental solutions per edge and the Weyl matrix of a tree."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import InputError, SingularSystem
from .graph import EdgeData, TreeGraph
from .ode import solve_on_grid, solve_on_grid_backward, transfer_matrix
from .quadrature import cumulative_nc6

CSV_HEADER = ["k", "re_rho", "im_rho", "i", "j", "re_M", "im_M"]


@dataclass(frozen=True)
class WeylSamples:
    """Weyl matrices M(rho_k^2) of one tree; rows/cols follow ``leaves``."""

    rho: np.ndarray  # (K,)
    M: np.ndarray  # (K, m, m)
    leaves: tuple

    def __post_init__(self):
        if self.M.ndim != 3 or self.M.shape[0] != self.rho.size or self.M.shape[1] != self.M.shape[2]:
            raise InputError("Weyl samples must have shape (K, m, m) matching rho")
        if self.M.shape[1] != len(self.leaves):
            raise InputError("matrix dimension must equal the leaf count")
        if np.any(np.abs((self.rho**2).imag) <= 0):
            raise InputError("every rho_k^2 must be non-real")

    @property
    def K(self) -> int:
        return self.rho.size

    def submatrix(self, leaves) -> np.ndarray:
        idx = [self.leaves.index(v) for v in leaves]
        return self.M[:, idx][:, :, idx]

    def take(self, keep) -> "WeylSamples":
        keep = np.asarray(keep)
        return WeylSamples(self.rho[keep], self.M[keep], self.leaves)


@dataclass(frozen=True)
class EndpointValues:
    """phi, S, phi', S' at x = L for a batch of rho (leaf / origin at x = 0)."""

    phi: np.ndarray
    S: np.ndarray
    dphi: np.ndarray
    dS: np.ndarray

    def wronskian(self) -> np.ndarray:
        return self.phi * self.dS - self.dphi * self.S


def edge_fundamental(edge: EdgeData, rho, n_steps: int | None = None) -> EndpointValues:
    """phi, S and derivatives at x = L by direct integration (vectorized over rho)."""
    T = transfer_matrix(edge.q, edge.length, rho, n_steps)
    return EndpointValues(T[:, 0, 0], T[:, 0, 1], T[:, 1, 0], T[:, 1, 1])


def lambda0_solutions(edge: EdgeData, n_points: int | None = None) -> dict:
    """phi(0, x), T(0, x) and their derivatives on a uniform grid of the edge."""
    G = n_points or edge.grid_points
    x = np.linspace(0.0, edge.length, G)
    phi = solve_on_grid(edge.q, edge.length, G, [1.0, 0.0])
    T = solve_on_grid_backward(edge.q, edge.length, G, [0.0, 1.0])
    q_int = cumulative_nc6(edge.q(x), x[1] - x[0])
    return {
        "x": x,
        "phi": phi[:, 0].real, "dphi": phi[:, 1].real,
        "T": T[:, 0].real, "dT": T[:, 1].real,
        "q_int": q_int,
    }


def _endpoint_tables(graph: TreeGraph, edges: dict, rho, n_steps=None) -> dict:
    return {e.index: edge_fundamental(edges[e.index], rho, n_steps) for e in graph.edges}


def assemble_weyl(graph: TreeGraph, edges: dict, rho, n_steps: int | None = None,
                  return_solutions: bool = False):
    """Weyl matrices M(rho^2) for each rho; shape (K, m, m).

    Unknowns are (A_e, B_e) per edge with u = A_e phi_e + B_e S_e in the
    edge's own coordinate (x = 0 at ``edges[e].origin``).  Rows: leaf data,
    continuity and Kirchhoff at each internal vertex.  M_ij is the derivative
    of w_i at leaf j taken into the graph.
    """
    rho = np.atleast_1d(np.asarray(rho, dtype=complex))
    if np.any(np.abs((rho**2).imag) <= 0):
        raise InputError("rho^2 must be non-real")
    tables = _endpoint_tables(graph, edges, rho, n_steps)
    pos = {e.index: p for p, e in enumerate(graph.edges)}
    P, K, m = graph.n_edges, rho.size, graph.m
    A = np.zeros((K, 2 * P, 2 * P), dtype=complex)

    def value_row(eid, v):
        """Coefficients of u_e(v) and of the outward derivative at v."""
        val = np.zeros((K, 2 * P), dtype=complex)
        der = np.zeros((K, 2 * P), dtype=complex)
        c = 2 * pos[eid]
        if v == edges[eid].origin:
            val[:, c] = 1.0
            der[:, c + 1] = 1.0
        else:
            t = tables[eid]
            val[:, c], val[:, c + 1] = t.phi, t.S
            der[:, c], der[:, c + 1] = -t.dphi, -t.dS
        return val, der

    row = 0
    leaf_rows = []
    for leaf in graph.leaves:
        e = graph.leaf_edge(leaf)
        A[:, row] = value_row(e.index, leaf)[0]
        leaf_rows.append(row)
        row += 1
    for v in graph.internal_vertices:
        inc = graph.incident[v]
        vals, ders = zip(*(value_row(eid, v) for eid in inc))
        for k in range(1, len(inc)):
            A[:, row] = vals[0] - vals[k]
            row += 1
        A[:, row] = sum(ders)
        row += 1
    if row != 2 * P:
        raise InputError("graph is not a tree: equation count mismatch")

    rhs = np.zeros((K, 2 * P, m), dtype=complex)
    rhs[:, leaf_rows, np.arange(m)] = 1.0
    try:
        coef = np.linalg.solve(A, rhs)  # (K, 2P, m): column i is w_i
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"Weyl system singular: {exc}") from exc
    if not np.all(np.isfinite(coef)):
        raise SingularSystem("Weyl system produced non-finite coefficients")

    M = np.empty((K, m, m), dtype=complex)
    for j, leaf in enumerate(graph.leaves):
        e = graph.leaf_edge(leaf)
        _, der = value_row(e.index, leaf)
        M[:, :, j] = np.einsum("kc,kci->ki", der, coef)
    if return_solutions:
        return M, coef, tables
    return M


def rho_grid(K: int = 180, alpha_min: float = 0.0, alpha_max: float = 2.0,
             im_offset: float = 0.1, seed: int = 1) -> np.ndarray:
    """rho_k = 10**alpha_k + i*im_offset with alpha_k uniform random, sorted."""
    if K < 1:
        raise InputError("K must be at least 1")
    rng = np.random.default_rng(seed)
    alpha = np.sort(rng.uniform(alpha_min, alpha_max, size=K))
    return 10.0**alpha + 1j * im_offset


def sample_weyl(graph: TreeGraph, edges: dict, rho, n_steps: int | None = None) -> WeylSamples:
    rho = np.atleast_1d(np.asarray(rho, dtype=complex))
    return WeylSamples(rho, assemble_weyl(graph, edges, rho, n_steps), tuple(graph.leaves))


def write_weyl_csv(samples: WeylSamples, path=None, header_comment: str | None = None) -> str:
    """Serialize in k-major, then i, then j order; floats use repr (round-trip exact)."""
    buf = io.StringIO()
    if header_comment:
        buf.write(f"# {header_comment}\n")
    buf.write(f"# leaves={','.join(map(str, samples.leaves))}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    m = len(samples.leaves)
    for k, r in enumerate(samples.rho):
        for i in range(m):
            for j in range(m):
                z = samples.M[k, i, j]
                w.writerow([k, repr(float(r.real)), repr(float(r.imag)), i, j,
                            repr(float(z.real)), repr(float(z.imag))])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def read_weyl_csv(path, leaves=None) -> WeylSamples:
    """Inverse of :func:`write_weyl_csv`; ``leaves`` overrides the stored ids."""
    stored = None
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("leaves="):
                    stored = tuple(s for s in body[len("leaves="):].split(",") if s)
                continue
            rows.append(line)
    reader = csv.reader(rows)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != CSV_HEADER:
        raise InputError(f"{path}: expected header {','.join(CSV_HEADER)}")
    data = [r for r in reader if r]
    try:
        ks = np.array([int(r[0]) for r in data])
        ii = np.array([int(r[3]) for r in data])
        jj = np.array([int(r[4]) for r in data])
        vals = np.array([[float(r[1]), float(r[2]), float(r[5]), float(r[6])] for r in data])
    except (ValueError, IndexError) as exc:
        raise InputError(f"{path}: malformed row ({exc})") from exc
    K, m = ks.max() + 1, ii.max() + 1
    if len(data) != K * m * m:
        raise InputError(f"{path}: expected {K * m * m} rows, found {len(data)}")
    rho = np.empty(K, dtype=complex)
    M = np.empty((K, m, m), dtype=complex)
    rho[ks] = vals[:, 0] + 1j * vals[:, 1]
    M[ks, ii, jj] = vals[:, 2] + 1j * vals[:, 3]
    if leaves is None:
        leaves = stored if stored is not None and len(stored) == m else tuple(range(m))
    return WeylSamples(rho, M, tuple(leaves))
