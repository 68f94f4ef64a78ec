"""Per-unit base and reference-frame transforms.

All transforms use the amplitude-invariant (2/3) scaling, so the norm of a
space vector equals the peak phase value of a balanced three-phase set.
Zero sequence is dropped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

SQRT3 = math.sqrt(3.0)
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PerUnitBase:
    s_base: float = 1.0e6  # VA
    v_base: float = 480.0  # V, line-to-line RMS
    f_base: float = 60.0  # Hz
    i_base: float = field(init=False)
    z_base: float = field(init=False)
    omega_base: float = field(init=False)

    def __post_init__(self):
        for name in ("s_base", "v_base", "f_base"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        object.__setattr__(self, "i_base", self.s_base / (SQRT3 * self.v_base))
        object.__setattr__(self, "z_base", self.v_base**2 / self.s_base)
        object.__setattr__(self, "omega_base", TWO_PI * self.f_base)


class AbcTriple(NamedTuple):
    a: float
    b: float
    c: float


class SpaceVector(NamedTuple):
    alpha: float
    beta: float

    def magnitude(self) -> float:
        return math.hypot(self.alpha, self.beta)

    def __add__(self, other):  # type: ignore[override]
        return SpaceVector(self.alpha + other[0], self.beta + other[1])

    def __sub__(self, other):
        return SpaceVector(self.alpha - other[0], self.beta - other[1])

    def scale(self, k: float) -> "SpaceVector":
        return SpaceVector(k * self.alpha, k * self.beta)


class DqVector(NamedTuple):
    d: float
    q: float

    def magnitude(self) -> float:
        return math.hypot(self.d, self.q)


ZERO = SpaceVector(0.0, 0.0)


def clarke(x: AbcTriple) -> SpaceVector:
    a, b, c = x
    alpha = (2.0 / 3.0) * (a - 0.5 * b - 0.5 * c)
    beta = (2.0 / 3.0) * (SQRT3 / 2.0) * (b - c)
    return SpaceVector(alpha, beta)


def inverse_clarke(v: SpaceVector) -> AbcTriple:
    alpha, beta = v
    half_sqrt3 = 0.5 * SQRT3
    return AbcTriple(alpha, -0.5 * alpha + half_sqrt3 * beta, -0.5 * alpha - half_sqrt3 * beta)


def park(v: SpaceVector, theta: float) -> DqVector:
    """Rotate a stationary-frame vector into a frame at angle ``theta``."""
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")
    c = math.cos(theta)
    s = math.sin(theta)
    return DqVector(v[0] * c + v[1] * s, -v[0] * s + v[1] * c)


def inverse_park(v: DqVector, theta: float) -> SpaceVector:
    if not math.isfinite(theta):
        raise ValueError("theta must be finite")
    c = math.cos(theta)
    s = math.sin(theta)
    return SpaceVector(v[0] * c - v[1] * s, v[0] * s + v[1] * c)


def magnitude(v) -> float:
    return math.hypot(v[0], v[1])


def balanced_abc(peak: float, theta: float) -> AbcTriple:
    """Balanced positive-sequence set with phase-a angle ``theta``."""
    return AbcTriple(
        peak * math.cos(theta),
        peak * math.cos(theta - TWO_PI / 3.0),
        peak * math.cos(theta + TWO_PI / 3.0),
    )


def wrap_angle(theta: float) -> float:
    """Wrap into (-pi, pi]."""
    wrapped = math.fmod(theta + math.pi, TWO_PI)
    if wrapped <= 0.0:
        wrapped += TWO_PI
    return wrapped - math.pi
