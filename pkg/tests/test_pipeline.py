import json

import numpy as np
import pytest

from quantree.errors import EdgeSetMismatch, InsufficientSamples, RankDeficient
from quantree.forward import WeylSamples, read_weyl_csv
from quantree.graph import Edge, EdgeData, TreeGraph
from quantree.local import SolverConfig
from quantree.pipeline import (
    compare_dir,
    compare_edges,
    relative_error,
    run_forward,
    run_inverse,
    write_inverse_outputs,
)
from quantree.potentials import preset

from conftest import star, zero_star


def test_forward_two_edge_star_single_point(tmp_path):
    g, d = zero_star([1.0, 1.0])
    s = run_forward(g, d, K=1, seed=5, out=tmp_path / "w.csv")
    rho = s.rho[0]
    assert abs(s.M[0, 0, 0] + rho / np.tan(2 * rho)) < 1e-11
    assert abs(s.M[0, 0, 1] - rho / np.sin(2 * rho)) < 1e-11
    assert read_weyl_csv(tmp_path / "w.csv").K == 1


def test_forward_is_deterministic(tmp_path):
    g, d = zero_star([1.0, 2.0, 0.5])
    run_forward(g, d, K=20, out=tmp_path / "a.csv")
    run_forward(g, d, K=20, out=tmp_path / "b.csv")
    run_forward(g, d, K=20, seed=2, out=tmp_path / "c.csv")
    a, b, c = ((tmp_path / f"{n}.csv").read_bytes() for n in "abc")
    assert a == b and a != c


def test_example1_report_structure(example1, example1_result):
    g, _ = example1
    rep = example1_result.report
    assert rep.status == "ok" and rep.wall_time > 0
    kinds = [it["kind"] for it in rep.iterations]
    assert kinds == ["sheaf", "star"]
    covered = [e for it in rep.iterations for e in it["edges"]]
    assert sorted(covered) == sorted(e.index for e in g.edges)
    assert set(example1_result.edges) == set(covered)
    first = rep.iterations[0]
    assert first["vertex"] == "v0" and first["dropped"] == [] and len(first["peeled_from"]) == 16
    assert all(r["roots_D"] == 100 for it in rep.iterations for r in it["edge_reports"])


def test_example2_one_peel_then_star(example2, example2_result):
    rep = example2_result.report
    assert [it["kind"] for it in rep.iterations] == ["sheaf", "star"]
    assert len(rep.iterations[1]["edges"]) == 9
    assert len(example2_result.edges) == 18


def test_recovered_edges_use_file_orientation(example1_result):
    r0 = example1_result.edges[0]
    assert r0.x[0] == 0 and np.isclose(r0.x[-1], 1.4)
    # the stem is solved in the second stage with v0 (its endpoint a) as the new leaf
    assert r0.iteration == 1


def test_accuracy_of_smooth_edges(example1, example1_result):
    _, ed = example1
    for eid in (2, 3, 4):
        r = example1_result.edges[eid]
        assert relative_error(r.q, ed[eid].q(r.x)) < 0.01


def test_single_interval():
    g = TreeGraph(("a", "b"), (Edge(0, "a", "b", 1.0),), ("a", "b"))
    d = {0: EdgeData(0, 1.0, preset("constant", 1.0), "a")}
    s = run_forward(g, d, K=180)
    res = run_inverse(g, s)
    assert [it["kind"] for it in res.report.iterations] == ["interval"]
    assert np.abs(res.edges[0].q - 1).max() < 1e-3


def test_flipped_leaf_edge_is_reported_in_file_orientation():
    g = TreeGraph(("c", "l1", "l2", "l3"), (Edge(0, "l1", "c", 1.0), Edge(1, "c", "l2", 1.0),
                                            Edge(2, "l3", "c", 1.0)), ("l1", "l2", "l3"))
    d = {0: EdgeData(0, 1.0, preset("q2"), "l1"), 1: EdgeData(1, 1.0, preset("q7"), "c"),
         2: EdgeData(2, 1.0, preset("q3"), "l3")}
    res = run_inverse(g, run_forward(g, d))
    r = res.edges[1]
    assert relative_error(r.q, np.exp(r.x)) < 0.02


def test_leaf_order_of_samples_is_aligned():
    g, d = star([1.0, 1.1, 0.9], [preset("q2"), preset("q3"), preset("q7")])
    s = run_forward(g, d)
    perm = [2, 0, 1]
    shuffled = WeylSamples(s.rho, s.M[:, perm][:, :, perm], tuple(s.leaves[k] for k in perm))
    a, b = run_inverse(g, s), run_inverse(g, shuffled)
    for e in a.edges:
        assert np.array_equal(a.edges[e].q, b.edges[e].q)


def test_failure_carries_partial_report():
    g, d = zero_star([1.0] * 3)
    s = run_forward(g, d, K=12)
    with pytest.raises(InsufficientSamples) as exc:
        run_inverse(g, s)
    assert exc.value.partial.report.status == "failed" and exc.value.partial.edges == {}
    bad = WeylSamples(run_forward(g, d, K=40).rho, np.full((40, 3, 3), np.nan + 0j), s.leaves)
    with pytest.raises(RankDeficient) as exc:
        run_inverse(g, bad)
    assert "RankDeficient" in exc.value.partial.report.error


def test_outputs_and_compare(tmp_path, example1, example1_result):
    _, ed = example1
    files = write_inverse_outputs(example1_result, tmp_path / "rec")
    assert (tmp_path / "rec" / "edge_8.csv") in files
    rep = json.loads((tmp_path / "rec" / "report.json").read_text())
    assert "wall_time" not in rep and rep["status"] == "ok"
    assert "wall_time" in json.loads((tmp_path / "rec" / "timing.json").read_text())
    table = compare_dir(tmp_path / "rec", ed, tmp_path / "cmp")
    assert set(table) == {str(k) for k in range(9)}
    lines = (tmp_path / "cmp" / "errors.csv").read_text().splitlines()
    assert lines[0] == "edge,max_abs_error,max_rel_error" and [ln.split(",")[0] for ln in lines[1:]] == \
        [str(k) for k in range(9)]
    assert (tmp_path / "cmp" / "curve_3.csv").exists()


def test_compare_trivial_cases(example1):
    _, ed = example1
    x = np.linspace(0, 1, 50)
    exact = {k: (np.linspace(0, ed[k].length, 50), ed[k].q(np.linspace(0, ed[k].length, 50))) for k in ed}
    table = compare_edges(exact, ed)
    assert all(row["max_abs_error"] == 0 and row["max_rel_error"] == 0 for row in table.values())
    shifted = {k: (xx, qq + 0.125) for k, (xx, qq) in exact.items()}
    table = compare_edges(shifted, ed)
    assert all(np.isclose(row["max_abs_error"], 0.125) for row in table.values())
    with pytest.raises(EdgeSetMismatch):
        compare_edges({0: (x, x)}, ed)


def test_relative_error_mask():
    ref = np.array([10.0, 0.5, -10.0])
    assert relative_error(ref + np.array([1.0, 100.0, 0.0]), ref) == pytest.approx(0.1)
    assert relative_error(np.array([0.2, -0.3]), np.zeros(2)) == pytest.approx(0.3)


def test_config_is_echoed(example1_result):
    assert example1_result.report.config == SolverConfig().as_dict()


def test_compare_edges_accepts_recovered_edges(example2, example2_result):
    _, ed = example2
    direct = compare_edges(example2_result.edges, ed)
    tuples = compare_edges({e: (r.x, r.q) for e, r in example2_result.edges.items()}, ed)
    assert direct.keys() == tuples.keys()
    for k in direct:
        assert direct[k]["max_rel_error"] == tuples[k]["max_rel_error"]
    assert direct["5"]["max_rel_error"] < 0.05
