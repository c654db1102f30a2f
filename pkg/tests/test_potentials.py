import numpy as np
import pytest

from quantree.errors import InputError
from quantree.potentials import PRESET_NAMES, fourier_random, preset, sampled


def test_presets_values():
    x = np.array([0.0, 0.5, 1.0])
    assert np.allclose(preset("q2")(x), np.exp(-((x - 0.5) ** 2)))
    assert np.allclose(preset("q1")(x), np.abs(x - 1) + 1)
    assert np.allclose(preset("q5")(x), 1 / (x + 0.1))
    assert np.allclose(preset("constant", 2.5)(x), 2.5)
    assert np.allclose(preset("zero")(x), 0.0)


def test_saddle_is_continuous_and_symmetric():
    q = preset("saddle")
    x = np.linspace(0, 1, 1001)
    assert np.allclose(q(x), q(1 - x), atol=1e-12)
    for b in q.breakpoints:
        assert abs(q(np.array([b - 1e-12]))[0] - q(np.array([b + 1e-12]))[0]) < 1e-9
    assert np.isclose(q(np.array([0.25]))[0], 2.2) and np.isclose(q(np.array([0.5]))[0], 0.0)


def test_every_name_resolves():
    for name in PRESET_NAMES:
        assert np.all(np.isfinite(preset(name)(np.linspace(0, 1, 5))))
    with pytest.raises(InputError):
        preset("nope")


def test_reflection():
    q = preset("q1").reflected(1.5)
    assert np.isclose(q(np.array([0.0]))[0], preset("q1")(np.array([1.5]))[0])
    assert q.breakpoints == (0.5,)


def test_sampled_spline_reproduces_smooth_function():
    x = np.linspace(0, 2, 201)
    q = sampled(np.sin(x), 2.0)
    assert np.allclose(q(np.linspace(0, 2, 37)), np.sin(np.linspace(0, 2, 37)), atol=1e-7)
    with pytest.raises(InputError):
        sampled([1, 2], 1.0)
    with pytest.raises(InputError):
        sampled([1, 2, np.nan, 3, 4], 1.0)


def test_fourier_random_is_reproducible():
    a = fourier_random(np.random.default_rng(3), 1.2)(np.linspace(0, 1.2, 9))
    b = fourier_random(np.random.default_rng(3), 1.2)(np.linspace(0, 1.2, 9))
    assert np.array_equal(a, b)
