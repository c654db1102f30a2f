"""Graph spec files, recovered-potential CSVs and the two example graphs."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import InputError
from .graph import DEFAULT_GRID, Edge, EdgeData, TreeGraph, validate_tree
from .potentials import Potential, preset, sampled


def _potential_from_spec(spec, length: float) -> Potential:
    if not isinstance(spec, dict):
        raise InputError(f"potential must be an object, got {spec!r}")
    if "preset" in spec:
        return preset(spec["preset"], spec.get("value"))
    if "samples" in spec:
        return sampled(spec["samples"], length)
    raise InputError("potential needs either 'preset' or 'samples'")


def graph_from_dict(data: dict, require_potentials: bool = False, grid_points: int = DEFAULT_GRID):
    """Build (TreeGraph, {edge id: EdgeData} or None) from a parsed spec.

    Edge ids default to the position in the edge list; x = 0 sits at ``a``.
    """
    try:
        vertices = tuple(data["vertices"])
        raw_edges = data["edges"]
        leaf_order = tuple(data["leaf_order"])
    except (KeyError, TypeError) as exc:
        raise InputError(f"graph spec is missing field {exc}") from exc
    edges, potentials = [], {}
    for k, e in enumerate(raw_edges):
        try:
            eid = e.get("id", k)
            length = float(e["length"])
            edge = Edge(eid, e["a"], e["b"], length)
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"edge {k}: malformed entry ({exc})") from exc
        edges.append(edge)
        if "potential" in e and math.isfinite(length) and length > 0:
            potentials[eid] = _potential_from_spec(e["potential"], length)
    graph = validate_tree(TreeGraph(vertices, tuple(edges), leaf_order))
    if len(potentials) != len(edges):
        if require_potentials:
            missing = [e.index for e in edges if e.index not in potentials]
            raise InputError(f"edges without a potential: {missing!r}")
        return graph, None
    data_ = {e.index: EdgeData(e.index, e.length, potentials[e.index], e.a, grid_points) for e in edges}
    return graph, data_


def load_graph(path, require_potentials: bool = False, grid_points: int = DEFAULT_GRID):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read graph file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    return graph_from_dict(data, require_potentials, grid_points)


def write_graph(data: dict, path) -> None:
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


EXAMPLE1_LENGTHS = (1.4, math.e / 2, 1.0, math.pi / 2, math.pi / 3, math.e**2 / 4, 1.1, 1.2, 1.0)


def example1_spec() -> dict:
    """Nine edges: a five-edge sheaf at v0, stem e0 (x = 0 at v0), three leaves at v1."""
    L = EXAMPLE1_LENGTHS
    leaves = [f"g{k}" for k in range(1, 9)]
    edges = [{"id": 0, "a": "v0", "b": "v1", "length": L[0], "potential": {"preset": "q0"}}]
    for k in range(1, 9):
        edges.append({"id": k, "a": f"g{k}", "b": "v0" if k <= 5 else "v1", "length": L[k],
                      "potential": {"preset": f"q{k}"}})
    return {"vertices": ["v0", "v1"] + leaves, "edges": edges, "leaf_order": leaves}


def example2_spec() -> dict:
    """Eighteen edges: nine leaf edges at v0, stem e0, eight leaf edges at v1.

    Leaf edges e1..e8 and e10..e17 both carry q1..q8; e9 and the stem carry q0.
    """
    L = EXAMPLE1_LENGTHS
    lengths = {0: L[0], 9: L[0]}
    names = {0: "q0", 9: "q0"}
    for k in range(1, 9):
        lengths[k] = lengths[k + 9] = L[k]
        names[k] = names[k + 9] = f"q{k}"
    leaves = [f"g{k}" for k in range(1, 18)]
    edges = [{"id": 0, "a": "v0", "b": "v1", "length": lengths[0], "potential": {"preset": "q0"}}]
    for k in range(1, 18):
        edges.append({"id": k, "a": f"g{k}", "b": "v0" if k <= 9 else "v1", "length": lengths[k],
                      "potential": {"preset": names[k]}})
    return {"vertices": ["v0", "v1"] + leaves, "edges": edges, "leaf_order": leaves}


EXAMPLES = {"example1": example1_spec, "example2": example2_spec}


def write_potential_csv(path, x, q, q_ref=None) -> str:
    """Columns x, q_recovered[, q_reference, rel_error]; floats in repr form."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if q_ref is None:
        w.writerow(["x", "q_recovered"])
        for a, b in zip(x, q):
            w.writerow([repr(float(a)), repr(float(b))])
    else:
        w.writerow(["x", "q_recovered", "q_reference", "rel_error"])
        for a, b, c in zip(x, q, q_ref):
            rel = abs(b - c) / abs(c) if c != 0 else math.inf
            w.writerow([repr(float(a)), repr(float(b)), repr(float(c)), repr(float(rel))])
    text = buf.getvalue()
    Path(path).write_text(text, encoding="utf-8")
    return text


def read_potential_csv(path):
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not rows or rows[0][:2] != ["x", "q_recovered"]:
        raise InputError(f"{path}: expected header starting with x,q_recovered")
    try:
        arr = np.array([[float(r[0]), float(r[1])] for r in rows[1:] if r])
    except (ValueError, IndexError) as exc:
        raise InputError(f"{path}: malformed row ({exc})") from exc
    return arr[:, 0], arr[:, 1]
