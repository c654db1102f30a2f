import numpy as np
import pytest

from quantree.forward import edge_fundamental, lambda0_solutions
from quantree.graph import EdgeData
from quantree.ode import solve_on_grid, transfer_matrix
from quantree.potentials import preset

from oracles import ivp_solution


def test_free_transfer_matrix():
    rho = np.array([0.5 + 0.1j, 2 + 0.1j, 40 + 0.1j])
    T = transfer_matrix(preset("zero"), 1.3, rho)
    assert np.allclose(T[:, 0, 0], np.cos(rho * 1.3), atol=1e-12)
    assert np.allclose(T[:, 0, 1], np.sin(rho * 1.3) / rho, atol=1e-12)
    assert np.allclose(T[:, 1, 0], -rho * np.sin(rho * 1.3), atol=1e-10)
    assert np.allclose(T[:, 1, 1], np.cos(rho * 1.3), atol=1e-12)


def test_unit_determinant():
    T = transfer_matrix(preset("q6"), np.e**2 / 4, np.array([1 + 0.1j, 30 + 0.1j]))
    assert np.allclose(np.linalg.det(T), 1.0, atol=1e-11)


@pytest.mark.parametrize("rho", [1 + 0.1j, 7.5 + 0.1j, 60 - 0.3j])
def test_q5_against_ivp_oracle(rho):
    L = np.e**2 / 4
    edge = EdgeData(5, L, preset("q5"), "a")
    got = edge_fundamental(edge, np.array([rho]))
    phi = ivp_solution(edge.q, L, rho, (1, 0))[0]
    S = ivp_solution(edge.q, L, rho, (0, 1))[0]
    scale = max(1.0, abs(rho))
    assert abs(got.phi[0] - phi[0]) < 1e-9 * scale
    assert abs(got.dphi[0] - phi[1]) < 1e-9 * scale**2
    assert abs(got.S[0] - S[0]) < 1e-9
    assert abs(got.dS[0] - S[1]) < 1e-9 * scale


def test_q5_halved_step_richardson():
    L = np.e**2 / 4
    rho = np.array([1 + 0.1j, 50 + 0.1j])
    q = preset("q5")
    coarse = transfer_matrix(q, L, rho, 2000)
    fine = transfer_matrix(q, L, rho, 4000)
    oracle = (64 * fine - coarse) / 63
    default = transfer_matrix(q, L, rho)
    assert np.abs(default - oracle).max() / np.abs(oracle).max() < 1e-9


def test_lambda0_solutions_free():
    sol = lambda0_solutions(EdgeData(0, 1.0, preset("zero"), "a"), 101)
    assert np.allclose(sol["phi"], 1.0, atol=1e-14)
    assert np.allclose(sol["T"], sol["x"] - 1.0, atol=1e-14)


def test_lambda0_solutions_constant():
    sol = lambda0_solutions(EdgeData(0, 1.0, preset("constant", 1.0), "a"), 201)
    x = sol["x"]
    assert np.allclose(sol["phi"], np.cosh(x), atol=1e-12)
    assert np.allclose(sol["T"], np.sinh(x - 1.0), atol=1e-12)
    assert np.allclose(sol["dT"], np.cosh(x - 1.0), atol=1e-12)


def test_lambda0_saddle_against_ivp_oracle():
    q = preset("q8")
    sol = lambda0_solutions(EdgeData(8, 1.0, q, "a"), 401)
    ref = ivp_solution(q, 1.0, 0.0, (1, 0), sol["x"], q.breakpoints)
    assert np.abs(sol["phi"] - ref[:, 0].real).max() < 1e-9
    assert np.abs(sol["dphi"] - ref[:, 1].real).max() < 1e-9


def test_solve_on_grid_matches_transfer_matrix():
    q = preset("q3")
    rho = 4.0 + 0.1j
    grid = solve_on_grid(q, 1.0, 101, [1.0, 0.0], rho)
    T = transfer_matrix(q, 1.0, np.array([rho]))
    assert abs(grid[-1, 0] - T[0, 0, 0]) < 1e-10
