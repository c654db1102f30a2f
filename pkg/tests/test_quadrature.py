import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quantree.quadrature import cumulative_nc6, derivative5


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6), st.integers(6, 60), st.floats(0.1, 5.0))
def test_exact_for_quintics(coef, n, L):
    x = np.linspace(0, L, n)
    p = np.polynomial.Polynomial(coef)
    got = cumulative_nc6(p(x), x[1] - x[0])
    ref = p.integ()(x) - p.integ()(0)
    assert np.allclose(got, ref, rtol=1e-10, atol=1e-10 * max(1.0, np.abs(ref).max()))


def test_sixth_order_convergence():
    errs = []
    for n in (41, 81, 161):
        x = np.linspace(0, 2, n)
        errs.append(np.abs(cumulative_nc6(np.exp(np.sin(3 * x)), x[1] - x[0])[-1]
                           - cumulative_nc6(np.exp(np.sin(3 * np.linspace(0, 2, 2561))), 2 / 2560)[-1]))
    assert errs[0] / errs[1] > 40 and errs[1] / errs[2] > 40


def test_short_input_falls_back_to_trapezoid():
    y = np.array([0.0, 1.0, 2.0])
    assert np.allclose(cumulative_nc6(y, 1.0), [0.0, 0.5, 2.0])


def test_starts_at_zero_and_keeps_complex():
    y = np.exp(1j * np.linspace(0, 1, 30))
    out = cumulative_nc6(y, 1 / 29)
    assert out[0] == 0 and np.iscomplexobj(out)
    assert abs(out[-1] - (np.exp(1j) - 1) / 1j) < 1e-9


@pytest.mark.parametrize("deg", [1, 2, 3, 4])
def test_derivative5_exact_for_quartics(deg):
    x = np.linspace(-1, 1, 21)
    p = np.polynomial.Polynomial(np.arange(1, deg + 2, dtype=float))
    assert np.allclose(derivative5(p(x), x[1] - x[0]), p.deriv()(x), atol=1e-10)
