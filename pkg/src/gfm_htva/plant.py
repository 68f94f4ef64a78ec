"""Averaged-model electrical circuit in the stationary frame.

Inverter terminal voltage ``v_t`` feeds an RLC filter (``r_f``, ``l_f``,
``c_f``); the capacitor node is the PCC.  The grid is two series R-L segments
(PCC to fault bus, fault bus to an ideal source).  A three-phase fault is a
shunt conductance at the fault bus.

Per-unit dynamics, with time in seconds::

    (l_f/wb)  di_c/dt = v_t - v_o - r_f i_c
    (c_f/wb)  dv_o/dt = i_c - i_o
    (l_g1/wb) di_o/dt = v_o - v_fb - r_g1 i_o
    (l_g2/wb) di_g/dt = v_fb - v_g - r_g2 i_g,     v_fb = (i_o - i_g) / G

With no fault (G = 0) the two segments carry the same current and are merged.
The state is advanced with the trapezoidal rule; ``v_t`` is held over a step
and the grid source is evaluated at both ends.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .frames import SpaceVector, TWO_PI, wrap_angle

# Arc conductance below which a clearing fault is considered open.
ARC_CUTOFF = 0.05


class SimulationBlowUp(RuntimeError):
    """Raised when the integrated state stops being finite."""

    def __init__(self, t: float, message: str = ""):
        self.t = t
        super().__init__(message or f"numerical blow-up at t = {t:.6f} s")


class CalibrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class PlantParams:
    r_f: float = 0.1
    l_f: float = 0.156
    c_f: float = 0.023
    r_g1: float = 0.01
    l_g1: float = 0.05
    r_g2: float = 0.01
    l_g2: float = 0.05
    omega_base: float = TWO_PI * 60.0

    def __post_init__(self):
        for name in ("l_f", "c_f", "l_g1", "l_g2", "omega_base"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("r_f", "r_g1", "r_g2"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def z_g1(self) -> complex:
        return complex(self.r_g1, self.l_g1)

    @property
    def z_g2(self) -> complex:
        return complex(self.r_g2, self.l_g2)


@dataclass
class GridEventState:
    fault_conductance: float = 0.0
    phase_offset: float = 0.0
    v_grid_mag: float = 1.0
    # residual conductance of a fault being cleared, decays with clear_tau
    arc_conductance: float = 0.0
    clear_tau: float = 2e-3

    def __post_init__(self):
        if self.fault_conductance < 0:
            raise ValueError("fault_conductance must be non-negative")

    @property
    def conductance(self) -> float:
        return self.fault_conductance + self.arc_conductance


@dataclass(frozen=True)
class Event:
    kind: str  # fault_on | fault_off | phase_jump
    time: float
    value: float = 0.0  # conductance (pu) or angle (deg)


@dataclass
class PlantState:
    """Rows of ``x``: i_c, v_o, i_o, i_g; columns: alpha, beta."""

    x: np.ndarray = field(default_factory=lambda: np.zeros((4, 2)))
    theta_g: float = 0.0
    t: float = 0.0

    @property
    def i_c(self) -> SpaceVector:
        return SpaceVector(float(self.x[0, 0]), float(self.x[0, 1]))

    @property
    def v_o(self) -> SpaceVector:
        return SpaceVector(float(self.x[1, 0]), float(self.x[1, 1]))

    @property
    def i_o(self) -> SpaceVector:
        return SpaceVector(float(self.x[2, 0]), float(self.x[2, 1]))

    @property
    def i_g(self) -> SpaceVector:
        return SpaceVector(float(self.x[3, 0]), float(self.x[3, 1]))

    def stored_energy(self, params: PlantParams) -> float:
        """Magnetic plus electric energy (pu, up to the common 1/wb factor)."""
        sq = (self.x**2).sum(axis=1)
        if self.x[2, 0] == self.x[3, 0] and self.x[2, 1] == self.x[3, 1]:
            lg = params.l_g1 + params.l_g2
            return 0.5 * (params.l_f * sq[0] + params.c_f * sq[1] + lg * sq[2])
        return 0.5 * (
            params.l_f * sq[0] + params.c_f * sq[1] + params.l_g1 * sq[2] + params.l_g2 * sq[3]
        )


def grid_voltage(event_state: GridEventState, theta_g: float) -> SpaceVector:
    angle = theta_g + event_state.phase_offset
    v = event_state.v_grid_mag
    return SpaceVector(v * math.cos(angle), v * math.sin(angle))


def _state_matrices(params: PlantParams, conductance: float):
    wb = params.omega_base
    if conductance == 0.0:
        lg = params.l_g1 + params.l_g2
        rg = params.r_g1 + params.r_g2
        a = np.array(
            [
                [-wb * params.r_f / params.l_f, -wb / params.l_f, 0.0],
                [wb / params.c_f, 0.0, -wb / params.c_f],
                [0.0, wb / lg, -wb * rg / lg],
            ]
        )
        b = np.array([[wb / params.l_f, 0.0], [0.0, 0.0], [0.0, -wb / lg]])
        return a, b
    g_inv = 1.0 / conductance
    k1 = wb / params.l_g1
    k2 = wb / params.l_g2
    a = np.array(
        [
            [-wb * params.r_f / params.l_f, -wb / params.l_f, 0.0, 0.0],
            [wb / params.c_f, 0.0, -wb / params.c_f, 0.0],
            [0.0, k1, -k1 * (params.r_g1 + g_inv), k1 * g_inv],
            [0.0, 0.0, k2 * g_inv, -k2 * (params.r_g2 + g_inv)],
        ]
    )
    b = np.array([[wb / params.l_f, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, -k2]])
    return a, b


@lru_cache(maxsize=512)
def _discrete(params: PlantParams, conductance: float, dt: float):
    a, b = _state_matrices(params, conductance)
    n = a.shape[0]
    lhs = np.eye(n) - 0.5 * dt * a
    phi = np.linalg.solve(lhs, np.eye(n) + 0.5 * dt * a)
    gam = np.linalg.solve(lhs, 0.5 * dt * b)
    return phi, gam


def plant_step(
    state: PlantState,
    params: PlantParams,
    event_state: GridEventState,
    v_t,
    dt: float,
) -> PlantState:
    """Advance the circuit by one trapezoidal step of ``dt`` seconds."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    g = event_state.conductance
    theta_next = wrap_angle(state.theta_g + params.omega_base * dt)
    vg0 = grid_voltage(event_state, state.theta_g)
    vg1 = grid_voltage(event_state, theta_next)
    # inputs summed over both step ends; v_t is held
    u = np.array([[2.0 * v_t[0], 2.0 * v_t[1]], [vg0[0] + vg1[0], vg0[1] + vg1[1]]])
    phi, gam = _discrete(params, g, dt)
    x = state.x
    if g == 0.0:
        if x[2, 0] != x[3, 0] or x[2, 1] != x[3, 1]:
            x = x.copy()
            _merge_grid_currents(x, params)
        x3 = phi @ x[:3] + gam @ u
        x_new = np.vstack((x3, x3[2:3]))
    else:
        x_new = phi @ x + gam @ u
    t_new = state.t + dt
    if not np.isfinite(x_new).all():
        raise SimulationBlowUp(t_new)
    if event_state.arc_conductance > 0.0:
        _decay_arc(event_state, dt)
    return PlantState(x_new, theta_next, t_new)


def _decay_arc(event_state: GridEventState, dt: float) -> None:
    if event_state.clear_tau > 0:
        event_state.arc_conductance *= math.exp(-dt / event_state.clear_tau)
    if event_state.arc_conductance < ARC_CUTOFF:
        event_state.arc_conductance = 0.0


def _merge_grid_currents(x: np.ndarray, params: PlantParams) -> None:
    """Join the two grid segments conserving their total flux linkage."""
    lg = params.l_g1 + params.l_g2
    merged = (params.l_g1 * x[2] + params.l_g2 * x[3]) / lg
    x[2] = merged
    x[3] = merged


def apply_event(event_state: GridEventState, event: Event) -> GridEventState:
    """Return the grid state after ``event``; the input is not modified."""
    if event.kind == "fault_on":
        if event.value < 0:
            raise ValueError("fault conductance must be non-negative")
        return replace(event_state, fault_conductance=event.value, arc_conductance=0.0)
    if event.kind == "fault_off":
        return replace(
            event_state,
            fault_conductance=0.0,
            arc_conductance=event_state.conductance if event_state.clear_tau > 0 else 0.0,
        )
    if event.kind == "phase_jump":
        return replace(event_state, phase_offset=event_state.phase_offset + math.radians(event.value))
    raise ValueError(f"unknown event kind {event.kind!r}")


def fault_bus_ratio(params: PlantParams, conductance: float) -> float:
    """|v_fb / v_g| of the ideal-grid divider: segment 2 against the shunt."""
    return 1.0 / abs(1.0 + conductance * params.z_g2)


def calibrate_fault(params: PlantParams, target_vpcc: float, tol: float = 1e-10) -> float:
    """Fault conductance giving ``target_vpcc`` at the fault bus (bisection)."""
    if not 0.0 < target_vpcc <= 1.0:
        raise CalibrationError(f"target voltage must lie in (0, 1], got {target_vpcc!r}")
    if fault_bus_ratio(params, 0.0) <= target_vpcc:
        return 0.0
    lo, hi = 0.0, 1.0
    while fault_bus_ratio(params, hi) > target_vpcc:
        hi *= 2.0
        if hi > 1e9:
            raise CalibrationError(f"no fault conductance reaches {target_vpcc} pu")
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if fault_bus_ratio(params, mid) > target_vpcc:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
