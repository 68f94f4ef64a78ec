"""Droop-based grid-forming controller and inner current loop."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .blocks import FirstOrderState, PIState, lpf_step, pi_step
from .frames import TWO_PI, SpaceVector, wrap_angle


@dataclass(frozen=True)
class DroopParams:
    m_p: float = 0.05
    m_q: float = 0.05
    p_set: float = 0.5
    q_set: float = 0.5
    v_ref: float = 1.0
    omega_ref: float = 1.0
    omega_f: float = TWO_PI * 6.0
    omega_base: float = TWO_PI * 60.0

    def __post_init__(self):
        if not (self.m_p > 0 and self.m_q > 0):
            raise ValueError("droop coefficients must be positive")
        if not self.omega_f > 0:
            raise ValueError("omega_f must be positive")


@dataclass(frozen=True)
class CurrentControlParams:
    """dq current loop.  ``ki`` is in per-unit of base time (1/wb seconds).

    ``ff_cutoff`` (rad/s) low-passes the PCC-voltage feed-forward; an
    unfiltered feed-forward makes the inverter look like an ideal current
    source and leaves the filter-capacitor / grid-inductance resonance
    undamped.
    """

    kp: float = 1.1
    ki: float = 2.4
    v_ceiling: float = 1.25
    ff_cutoff: float = 1000.0
    l_f: float = 0.156
    omega_base: float = TWO_PI * 60.0

    @property
    def ki_per_second(self) -> float:
        return self.ki * self.omega_base


@dataclass
class ControllerState:
    p_filt: FirstOrderState
    q_filt: FirstOrderState
    pi_d: PIState
    pi_q: PIState
    ff_alpha: FirstOrderState
    ff_beta: FirstOrderState
    theta_gfm: float = 0.0
    omega_gfm: float = 1.0
    v_gfm: float = 1.0
    saturated: bool = field(default=False)

    @classmethod
    def create(cls, droop: DroopParams, cc: CurrentControlParams, dt: float) -> "ControllerState":
        return cls(
            p_filt=FirstOrderState(droop.omega_f, dt),
            q_filt=FirstOrderState(droop.omega_f, dt),
            pi_d=PIState(cc.kp, cc.ki_per_second),
            pi_q=PIState(cc.kp, cc.ki_per_second),
            ff_alpha=FirstOrderState(cc.ff_cutoff, dt),
            ff_beta=FirstOrderState(cc.ff_cutoff, dt),
            omega_gfm=droop.omega_ref,
            v_gfm=droop.v_ref,
        )


def power_calc(v_o, i_o) -> tuple[float, float]:
    """Instantaneous P and Q (per unit, peak-scaled vectors).

    Lagging current gives positive Q.
    """
    p = v_o[0] * i_o[0] + v_o[1] * i_o[1]
    q = v_o[1] * i_o[0] - v_o[0] * i_o[1]
    return p, q


def droop_laws(params: DroopParams, p_filt: float, q_filt: float) -> tuple[float, float]:
    omega = params.omega_ref + params.m_p * (params.p_set - p_filt)
    v = params.v_ref + params.m_q * (params.q_set - q_filt)
    return omega, v


def droop_step(state: ControllerState, params: DroopParams, p: float, q: float, dt: float) -> tuple[float, float]:
    """Filter the powers, apply the droop laws and advance the GFM angle."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    p_f = lpf_step(state.p_filt, p)
    q_f = lpf_step(state.q_filt, q)
    omega, v = droop_laws(params, p_f, q_f)
    state.omega_gfm = omega
    state.v_gfm = v
    state.theta_gfm = wrap_angle(state.theta_gfm + omega * params.omega_base * dt)
    return omega, v


def synthesize_vgfm(v_gfm: float, theta_gfm: float) -> SpaceVector:
    if v_gfm < 0:
        raise ValueError("V_gfm must be non-negative")
    return SpaceVector(v_gfm * math.cos(theta_gfm), v_gfm * math.sin(theta_gfm))


def current_control_step(
    state: ControllerState,
    i_ref,
    i_c,
    v_o,
    theta_gfm: float,
    params: CurrentControlParams,
    dt: float,
) -> SpaceVector:
    """dq PI current loop with v_o feed-forward and L_f decoupling.

    The command magnitude is capped at ``v_ceiling``; while capped the
    integrators are held.
    """
    ff_a = lpf_step(state.ff_alpha, v_o[0])
    ff_b = lpf_step(state.ff_beta, v_o[1])
    c = math.cos(theta_gfm)
    s = math.sin(theta_gfm)
    ird = i_ref[0] * c + i_ref[1] * s
    irq = -i_ref[0] * s + i_ref[1] * c
    icd = i_c[0] * c + i_c[1] * s
    icq = -i_c[0] * s + i_c[1] * c
    vod = ff_a * c + ff_b * s
    voq = -ff_a * s + ff_b * c

    integ_d, integ_q = state.pi_d.integ, state.pi_q.integ
    ud = pi_step(state.pi_d, ird - icd, dt)
    uq = pi_step(state.pi_q, irq - icq, dt)
    wl = state.omega_gfm * params.l_f
    vd = ud + vod - wl * icq
    vq = uq + voq + wl * icd

    mag = math.hypot(vd, vq)
    state.saturated = mag > params.v_ceiling
    if state.saturated:
        state.pi_d.integ = integ_d
        state.pi_q.integ = integ_q
        k = params.v_ceiling / mag
        vd *= k
        vq *= k
    return SpaceVector(vd * c - vq * s, vd * s + vq * c)
