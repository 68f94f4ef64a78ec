"""Discrete-time first-order filters and PI controller.

Every block is discretized with the trapezoidal (bilinear) rule at a fixed
step, so a low-pass and a high-pass filter sharing cut-off and step are
complementary sample by sample.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class FirstOrderState:
    """Memory of a bilinear first-order section with cut-off ``omega_c``.

    ``y_prev`` always holds the low-pass memory; the high-pass output is
    derived as the complement ``u - lowpass(u)``.
    """

    omega_c: float
    dt: float
    y_prev: float = 0.0
    u_prev: float = 0.0
    _c_mem: float = field(init=False, repr=False)
    _c_in: float = field(init=False, repr=False)

    def __post_init__(self):
        if not (self.omega_c > 0 and math.isfinite(self.omega_c)):
            raise ValueError(f"omega_c must be positive, got {self.omega_c!r}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        a = self.omega_c * self.dt
        if a >= 2.0:
            raise ValueError(f"omega_c*dt = {a:.3g} violates the bilinear validity bound (< 2)")
        self._c_mem = (2.0 - a) / (2.0 + a)
        self._c_in = a / (2.0 + a)

    def preload(self, u: float) -> None:
        """Set memories to the DC steady state of a constant input ``u``."""
        self.y_prev = u
        self.u_prev = u


@dataclass
class PIState:
    kp: float
    ki: float  # per second
    integ: float = 0.0
    e_prev: float = 0.0
    limit: float | None = None

    def __post_init__(self):
        if self.kp < 0 or self.ki < 0:
            raise ValueError("PI gains must be non-negative")
        if self.limit is not None and self.limit <= 0:
            raise ValueError("PI output limit must be positive")


def _check_finite(x: float, what: str) -> None:
    if not math.isfinite(x):
        raise ValueError(f"non-finite {what}: {x!r}")


def lpf_step(state: FirstOrderState, u: float) -> float:
    """omega_c / (s + omega_c), one bilinear step."""
    _check_finite(u, "filter input")
    y = state._c_mem * state.y_prev + state._c_in * (u + state.u_prev)
    state.y_prev = y
    state.u_prev = u
    return y


def hpf_step(state: FirstOrderState, u: float) -> float:
    """s / (s + omega_c), one bilinear step."""
    return u - lpf_step(state, u)


def pi_step(state: PIState, error: float, dt: float, freeze: bool = False) -> float:
    """Advance the PI by one step and return its output.

    The integrator uses the trapezoidal rule. It is held (conditional
    integration) when ``freeze`` is set or when the optional output clamp is
    active.
    """
    _check_finite(error, "PI error")
    integ = state.integ
    if not freeze:
        integ = integ + 0.5 * state.ki * dt * (error + state.e_prev)
    out = state.kp * error + integ
    if state.limit is not None and abs(out) > state.limit:
        out = math.copysign(state.limit, out)
        integ = state.integ
    state.integ = integ
    state.e_prev = error
    return out


def reset(state):
    if isinstance(state, FirstOrderState):
        state.y_prev = 0.0
        state.u_prev = 0.0
    elif isinstance(state, PIState):
        state.integ = 0.0
        state.e_prev = 0.0
    else:
        raise TypeError(f"cannot reset {type(state).__name__}")
    return state
