"""Orchestration: forward sampling, the peel-and-solve inverse loop, comparison."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EdgeSetMismatch, InputError, InsufficientSamples, NoInternalVertex
from .forward import WeylSamples, rho_grid, sample_weyl, write_weyl_csv
from .graph import StarTerminal, TreeGraph, find_sheaf, reduce, require_solvable
from .io import read_potential_csv, write_potential_csv
from .local import SolverConfig, endpoint_functions, solve_edge
from .peeling import PeelInput, peel, samples_hash

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RecoveredEdge:
    """Recovered potential on one edge, in the edge's own orientation (x = 0 at ``a``)."""

    edge: object
    length: float
    x: np.ndarray
    q: np.ndarray
    iteration: int
    recovery: object = field(default=None, repr=False, compare=False)


@dataclass
class RunReport:
    config: dict
    iterations: list = field(default_factory=list)
    wall_time: float = 0.0
    status: str = "ok"
    error: str | None = None

    def to_dict(self, with_timing: bool = False) -> dict:
        d = {"status": self.status, "error": self.error, "config": self.config,
             "iterations": self.iterations}
        if with_timing:
            d["wall_time"] = self.wall_time
        return d


@dataclass
class InverseResult:
    edges: dict
    report: RunReport


def run_forward(graph: TreeGraph, edge_data: dict, K: int = 180, alpha_min: float = 0.0,
                alpha_max: float = 2.0, im_offset: float = 0.1, seed: int = 1,
                out=None) -> WeylSamples:
    rho = rho_grid(K, alpha_min, alpha_max, im_offset, seed)
    samples = sample_weyl(graph, edge_data, rho)
    if out is not None:
        write_weyl_csv(samples, out)
    return samples


def _oriented(graph: TreeGraph, eid, leaf, x, q):
    """Flip a leaf-at-zero profile into the edge's stored orientation."""
    e = graph.edge_map[eid]
    if e.a == leaf:
        return x, q
    return (e.length - x)[::-1], q[::-1]


def _align(samples: WeylSamples, leaves) -> WeylSamples:
    if tuple(samples.leaves) == tuple(leaves):
        return samples
    if set(samples.leaves) != set(leaves):
        raise InputError(f"Weyl samples leaves {samples.leaves!r} do not match graph leaves {leaves!r}")
    return WeylSamples(samples.rho, samples.submatrix(leaves), tuple(leaves))


def _solve_block(graph, samples, leaves, leaf_edges, cfg, iteration):
    M = samples.submatrix(leaves)
    lengths = [graph.edge_map[eid].length for eid in leaf_edges]
    recs, out, info = {}, {}, []
    for i, (leaf, eid) in enumerate(zip(leaves, leaf_edges)):
        rec = solve_edge(M, samples.rho, lengths, i, eid, cfg)
        recs[leaf] = rec
        x, q = _oriented(graph, eid, leaf, rec.x, rec.q)
        out[eid] = RecoveredEdge(eid, rec.length, x, q, iteration, rec)
        info.append(rec.report())
        log.info("edge %s recovered (%d/%d roots)", eid, rec.spectra.mu.size, rec.spectra.nu.size)
    return recs, out, info


def run_inverse(graph: TreeGraph, samples: WeylSamples, cfg: SolverConfig = SolverConfig()) -> InverseResult:
    """Recover every edge potential from Weyl samples of the whole tree.

    Raises on the first failing stage; ``exc.partial`` then carries the
    InverseResult gathered so far.
    """
    t_start = time.perf_counter()
    report = RunReport(config=cfg.as_dict())
    recovered: dict = {}
    current = graph
    smp = _align(samples, graph.leaves)
    iteration = 0
    try:
        if smp.K < cfg.min_samples(2):
            raise InsufficientSamples(f"{smp.K} samples available, at least {cfg.min_samples(2)} needed")
        while True:
            try:
                sheaf = find_sheaf(current)
            except NoInternalVertex:
                (e,) = current.edges
                leaf = current.leaves[0]
                _, out, info = _solve_block(current, smp, (leaf,), (e.index,), cfg, iteration)
                recovered.update(out)
                report.iterations.append({"kind": "interval", "vertex": None, "edges": [e.index],
                                          "edge_reports": info, "dropped": []})
                break
            if isinstance(sheaf, StarTerminal):
                _, out, info = _solve_block(current, smp, sheaf.leaves, sheaf.leaf_edges, cfg, iteration)
                recovered.update(out)
                report.iterations.append({"kind": "star", "vertex": sheaf.center,
                                          "edges": list(sheaf.leaf_edges), "edge_reports": info,
                                          "dropped": []})
                break
            require_solvable(sheaf)
            recs, out, info = _solve_block(current, smp, sheaf.leaves, sheaf.leaf_edges, cfg, iteration)
            recovered.update(out)
            tables = {leaf: endpoint_functions(rec, smp.rho, cfg) for leaf, rec in recs.items()}
            res = peel(PeelInput(smp, sheaf, tables), cfg.drop_threshold)
            report.iterations.append({"kind": "sheaf", "vertex": sheaf.abscission,
                                      "edges": list(sheaf.leaf_edges), "edge_reports": info,
                                      "pivot": res.pivot, "peeled_from": samples_hash(smp),
                                      "dropped": list(res.dropped)})
            current = reduce(current, sheaf)
            smp = res.samples
            iteration += 1
    except Exception as exc:
        report.status = "failed"
        report.error = f"{type(exc).__name__}: {exc}"
        report.wall_time = time.perf_counter() - t_start
        exc.partial = InverseResult(recovered, report)
        raise
    report.wall_time = time.perf_counter() - t_start
    return InverseResult(recovered, report)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def write_inverse_outputs(result: InverseResult, out_dir) -> list:
    """Per-edge ``edge_<id>.csv`` files plus ``report.json`` (timing kept in ``timing.json``)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for eid in sorted(result.edges, key=str):
        r = result.edges[eid]
        p = out / f"edge_{eid}.csv"
        write_potential_csv(p, r.x, r.q)
        written.append(p)
    rep = out / "report.json"
    rep.write_text(json.dumps(_jsonable(result.report.to_dict()), indent=2, sort_keys=True) + "\n",
                   encoding="utf-8")
    (out / "timing.json").write_text(json.dumps({"wall_time": result.report.wall_time}) + "\n",
                                     encoding="utf-8")
    written.append(rep)
    return written


def relative_error(q, q_ref) -> float:
    """Max |q - q_ref|/|q_ref| over points where |q_ref| > 0.1 max|q_ref|."""
    q, q_ref = np.asarray(q), np.asarray(q_ref)
    scale = np.abs(q_ref).max()
    if scale == 0:
        return float(np.abs(q).max())
    mask = np.abs(q_ref) > 0.1 * scale
    return float(np.max(np.abs(q - q_ref)[mask] / np.abs(q_ref[mask])))


def compare_edges(recovered: dict, edge_data: dict) -> dict:
    """Per-edge max absolute and relative error against reference potentials.

    ``recovered`` maps edge ids to ``(x, q)`` pairs or ``RecoveredEdge`` objects.
    """
    if set(map(str, recovered)) != set(map(str, edge_data)):
        raise EdgeSetMismatch(
            f"recovered edges {sorted(map(str, recovered))} differ from reference "
            f"{sorted(map(str, edge_data))}")
    by_name = {str(k): v for k, v in edge_data.items()}
    table = {}
    for eid, rec in recovered.items():
        x, q = (rec.x, rec.q) if isinstance(rec, RecoveredEdge) else rec
        ref = by_name[str(eid)].q(np.asarray(x))
        table[str(eid)] = {"max_abs_error": float(np.abs(np.asarray(q) - ref).max()),
                           "max_rel_error": relative_error(q, ref),
                           "x": np.asarray(x), "q": np.asarray(q), "q_ref": ref}
    return table


def compare_dir(recovered_dir, edge_data: dict, out_dir=None) -> dict:
    """Read ``edge_<id>.csv`` files, compare, and optionally write curve CSVs and a summary."""
    rec = {}
    for p in sorted(Path(recovered_dir).glob("edge_*.csv")):
        rec[p.stem[len("edge_"):]] = read_potential_csv(p)
    table = compare_edges(rec, edge_data)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for eid, row in table.items():
            write_potential_csv(out / f"curve_{eid}.csv", row["x"], row["q"], row["q_ref"])
        lines = ["edge,max_abs_error,max_rel_error"]
        lines += [f"{eid},{row['max_abs_error']!r},{row['max_rel_error']!r}"
                  for eid, row in sorted(table.items(), key=lambda kv: _edge_key(kv[0]))]
        (out / "errors.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return table


def _edge_key(eid: str):
    return (0, int(eid), "") if eid.lstrip("-").isdigit() else (1, 0, eid)
