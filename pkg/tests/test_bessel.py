import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quantree.bessel import MAX_ORDER, sph_bessel_j, sph_jn_all
from quantree.errors import OrderTooLarge


def mp_sph_jn(n, z):
    z = mp.mpc(z)
    if z == 0:
        return mp.mpf(1) if n == 0 else mp.mpf(0)
    return mp.sqrt(mp.pi / (2 * z)) * mp.besselj(n + mp.mpf(1) / 2, z)


def test_j0_at_zero():
    assert sph_bessel_j(0, 0) == 1


def test_j0_at_pi():
    assert abs(sph_bessel_j(0, np.pi)) < 1e-15


def test_j1_at_one_maclaurin_oracle():
    # j_1(z) = sum_k (-1)^k z^(2k+1) / (2^k k! (2k+3)!!) at z = 1
    mp.mp.dps = 40
    oracle = mp.nsum(lambda k: (-1) ** k / (mp.mpf(2) ** k * mp.factorial(k) * mp.fac2(2 * k + 3)),
                     [0, mp.inf])
    assert abs(float(oracle) - 0.30116867893975674) < 1e-16
    assert abs(sph_bessel_j(1, 1.0) - 0.30116867893975674) < 1e-15


@pytest.mark.parametrize("z", [1e-6, 0.3, 0.49 + 0.1j, 2.0 + 0.1j, 7.3, 19.0 - 0.5j, 45.0 + 0.1j, 150.0 + 0.1j, 1000.0])
def test_matches_mpmath(z):
    mp.mp.dps = 50
    vals = sph_jn_all(21, z)
    for n in range(22):
        ref = complex(mp_sph_jn(n, z))
        assert abs(vals[n] - ref) <= 1e-12 * abs(ref) + 1e-300


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 200.0), st.floats(-0.5, 0.5), st.integers(0, 21))
def test_relative_accuracy_in_strip(re, im, n):
    mp.mp.dps = 40
    z = complex(re, im)
    ref = complex(mp_sph_jn(n, z))
    got = sph_bessel_j(n, z)
    assert abs(got - ref) <= 1e-11 * abs(ref) + 1e-300


def test_vectorized_shape():
    z = np.linspace(0, 10, 12).reshape(3, 4)
    assert sph_jn_all(5, z).shape == (6, 3, 4)


def test_order_limits():
    with pytest.raises(OrderTooLarge):
        sph_jn_all(MAX_ORDER + 1, 1.0)
    with pytest.raises(ValueError):
        sph_bessel_j(-1, 1.0)
