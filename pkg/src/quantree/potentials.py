"""Edge potentials: named presets, sampled potentials, and reflection.

A potential is any callable ``q(x) -> array`` on ``[0, L]``.  Callables may
carry a ``breakpoints`` tuple listing kinks (the integrator aligns steps with
them).  The presets reproduce the nine edge potentials of the test graph
used throughout the examples and acceptance suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import j0

from .errors import InputError


@dataclass(frozen=True)
class Potential:
    name: str
    func: object
    breakpoints: tuple = ()
    params: dict = field(default_factory=dict)

    def __call__(self, x):
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)

    def reflected(self, length: float) -> "Potential":
        """q(L - x): the same potential seen from the other endpoint."""
        f = self.func
        return Potential(
            name=f"reflected({self.name})",
            func=lambda x: f(length - np.asarray(x)),
            breakpoints=tuple(sorted(length - b for b in self.breakpoints)),
            params={"base": self.name, "length": length, **self.params},
        )


def _saddle(x):
    return np.where(
        x < 0.25,
        -35.2 * x**2 + 17.6 * x,
        np.where(x < 0.75, 35.2 * x**2 - 35.2 * x + 8.8, -35.2 * x**2 + 52.8 * x - 17.6),
    )


_PRESETS = {
    "q0": (lambda x: j0(9.0 * x) + 1.0, ()),
    "q1": (lambda x: np.abs(x - 1.0) + 1.0, (1.0,)),
    "q2": (lambda x: np.exp(-((x - 0.5) ** 2)), ()),
    "q3": (lambda x: np.sin(8.0 * x) + 2.0 * np.pi / 3.0, ()),
    "q4": (lambda x: np.cos(9.0 * x**2) + 2.0, ()),
    "q5": (lambda x: 1.0 / (x + 0.1), ()),
    "q6": (lambda x: 1.0 / (x + 0.1) ** 2, ()),
    "q7": (lambda x: np.exp(x), ()),
    "q8": (_saddle, (0.25, 0.75)),
}

PRESET_NAMES = tuple(_PRESETS) + ("saddle", "zero", "constant")


def preset(name: str, value: float | None = None) -> Potential:
    """Look up a named potential.  ``constant`` takes ``value``."""
    if name == "zero":
        return Potential("zero", lambda x: np.zeros_like(x))
    if name == "constant":
        c = 1.0 if value is None else float(value)
        return Potential("constant", lambda x: np.full_like(x, c), params={"value": c})
    if name == "saddle":
        name = "q8"
    try:
        func, bps = _PRESETS[name]
    except KeyError:
        raise InputError(f"unknown potential preset {name!r}") from None
    return Potential(name, func, bps)


def sampled(samples, length: float) -> Potential:
    """Cubic-spline potential through samples on a uniform grid of [0, L]."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1 or samples.size < 4:
        raise InputError("potential samples must be a 1-D list of at least 4 values")
    if not np.all(np.isfinite(samples)):
        raise InputError("potential samples must be finite")
    spline = CubicSpline(np.linspace(0.0, length, samples.size), samples)
    return Potential("samples", lambda x: spline(x), params={"n": samples.size})


def fourier_random(rng: np.random.Generator, length: float, modes: int = 4, scale: float = 2.0) -> Potential:
    """Smooth random potential: offset plus a few random cosine/sine modes."""
    a = rng.normal(size=modes) * scale / np.arange(1, modes + 1)
    b = rng.normal(size=modes) * scale / np.arange(1, modes + 1)
    c = rng.uniform(0.0, scale)
    k = np.pi * np.arange(1, modes + 1) / length

    def f(x):
        x = np.asarray(x)[..., None]
        return c + (a * np.cos(k * x) + b * np.sin(k * x)).sum(-1)

    return Potential("fourier", f, params={"modes": modes})
