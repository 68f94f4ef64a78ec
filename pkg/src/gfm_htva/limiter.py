"""Virtual-admittance fault current limiting.

Three strategies share one admittance: the threshold strategy (TVA) sizes the
virtual impedance from the current overshoot above ``i_th``; the
voltage-information strategy (VAv) sizes it from ``|v_gfm - v_o|`` so the
quasi-steady current is exactly ``i_max``; the hybrid (HTVA) applies whichever
of the two is larger.  A high-pass filtered activation signal temporarily
lowers the X/R ratio from ``sigma_ss`` towards ``sigma_tr`` right after the
limiter engages, which damps the transient.

Outside overcurrent the admittance runs at its nominal elements.  During
overcurrent a selected impedance smaller than the nominal one is replaced by
the nominal pair, so the admittance never loses its resistive floor.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .blocks import FirstOrderState, hpf_step
from .frames import TWO_PI, SpaceVector


class Strategy(str, enum.Enum):
    TVA = "tva"
    VAV = "vav"
    HTVA = "htva"

    @classmethod
    def parse(cls, name: str) -> "Strategy":
        try:
            return cls(name.strip().lower())
        except ValueError:
            valid = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown strategy {name!r} (valid: {valid})") from None


@dataclass(frozen=True)
class LimiterParams:
    i_max: float = 1.2
    i_th: float = 1.0
    sigma_ss: float = 8.0
    sigma_tr: float = 0.1
    v_n: float = 1.0
    r_nom: float = 0.1
    l_nom: float = 0.2
    omega_d: float = 60.0
    hysteresis: float = 0.02
    hold_time: float = 5e-3
    dv_source: str = "v_o"
    omega_base: float = TWO_PI * 60.0

    def __post_init__(self):
        if not self.i_th > 0:
            raise ValueError("i_th must be positive")
        if not self.i_max > self.i_th:
            raise ValueError(f"i_th ({self.i_th}) must be below i_max ({self.i_max})")
        if not self.sigma_tr > 0:
            raise ValueError("sigma_tr must be positive")
        if not self.sigma_ss > self.sigma_tr:
            raise ValueError(f"sigma_ss ({self.sigma_ss}) must exceed sigma_tr ({self.sigma_tr})")
        if not self.v_n > 0:
            raise ValueError("v_n must be positive")
        if not (self.r_nom > 0 and self.l_nom > 0):
            raise ValueError("nominal admittance elements must be positive")
        if not self.omega_d > 0:
            raise ValueError("omega_d must be positive")
        if not 0 <= self.hysteresis < 2 * self.i_th:
            raise ValueError("hysteresis band out of range")
        if self.hold_time < 0:
            raise ValueError("hold_time must be non-negative")
        if self.dv_source not in ("v_o", "v_t"):
            raise ValueError("dv_source must be 'v_o' or 'v_t'")

    @property
    def damping(self) -> float:
        return self.sigma_ss / self.sigma_tr - 1.0

    @property
    def nominal_pair(self) -> tuple[float, float]:
        # per-unit reactance equals per-unit inductance at nominal frequency
        return self.r_nom, self.l_nom


@dataclass
class LimiterOutput:
    r: float
    l: float
    z_tva: float
    z_vav: float
    sigma_now: float
    overcurrent: bool
    # hysteresis latch; ``overcurrent`` additionally requires the limiting
    # impedance to be in effect (not replaced by the nominal floor)
    latched: bool = False

    @property
    def z(self) -> float:
        return math.hypot(self.r, self.l)


@dataclass
class AdmittanceState:
    omega_base: float
    i_alpha: float = 0.0
    i_beta: float = 0.0
    u_alpha: float = 0.0
    u_beta: float = 0.0

    @property
    def i_ref(self) -> SpaceVector:
        return SpaceVector(self.i_alpha, self.i_beta)


@dataclass
class LimiterState:
    adm: AdmittanceState
    vtvr: FirstOrderState
    overcurrent: bool = False
    on_time: float = 0.0
    last: LimiterOutput | None = field(default=None, repr=False)

    @classmethod
    def create(cls, params: LimiterParams, dt: float) -> "LimiterState":
        return cls(AdmittanceState(params.omega_base), FirstOrderState(params.omega_d, dt))


def k_r(params: LimiterParams, sigma: float) -> float:
    return params.v_n / (params.i_max * (params.i_max - params.i_th) * math.sqrt(sigma * sigma + 1.0))


def tva_impedance(i_mag: float, params: LimiterParams, sigma_now: float) -> tuple[float, float]:
    if i_mag < params.i_th:
        return 0.0, 0.0
    r = k_r(params, sigma_now) * (i_mag - params.i_th)
    return r, sigma_now * r


def vav_impedance(dv_mag: float, i_mag: float, params: LimiterParams, sigma_now: float) -> tuple[float, float]:
    if i_mag < params.i_th:
        return 0.0, 0.0
    r = (dv_mag / params.i_max) / math.sqrt(sigma_now * sigma_now + 1.0)
    return r, sigma_now * r


def htva_select(tva, vav, overcurrent: bool, params: LimiterParams) -> tuple[float, float]:
    """Larger of the two impedances while overcurrent (ties go to TVA)."""
    if not overcurrent:
        return params.nominal_pair
    if math.hypot(vav[0], vav[1]) > math.hypot(tva[0], tva[1]):
        return vav
    return tva


def vtvr_sigma(hpf_state: FirstOrderState, activation: float, params: LimiterParams) -> float:
    """X/R ratio with the transient resistance driven by the activation edge.

    With the high-pass output ``h`` of the 0/1 activation signal, the total
    resistance is ``R_vi (1 + D h)`` for ``D = sigma_ss/sigma_tr - 1``, hence
    ``sigma = sigma_ss / (1 + D h)``.  A falling edge adds no resistance.
    """
    h = hpf_step(hpf_state, activation)
    if h <= 0.0:
        return params.sigma_ss
    return params.sigma_ss / (1.0 + params.damping * h)


def admittance_step(adm: AdmittanceState, v_gfm, v_t, r: float, l: float, dt: float) -> SpaceVector:
    """(l/wb) di/dt = (v_gfm - v_t) - r i per axis, one trapezoidal step."""
    if not (r > 0 and l > 0):
        raise ValueError("admittance elements must be positive")
    ua = v_gfm[0] - v_t[0]
    ub = v_gfm[1] - v_t[1]
    if not (math.isfinite(ua) and math.isfinite(ub)):
        raise ValueError("non-finite admittance drive")
    k = 0.5 * dt * adm.omega_base / l
    den = 1.0 + k * r
    num = 1.0 - k * r
    adm.i_alpha = (num * adm.i_alpha + k * (ua + adm.u_alpha)) / den
    adm.i_beta = (num * adm.i_beta + k * (ub + adm.u_beta)) / den
    adm.u_alpha = ua
    adm.u_beta = ub
    return SpaceVector(adm.i_alpha, adm.i_beta)


def update_overcurrent(state: LimiterState, i_mag: float, params: LimiterParams, dt: float) -> bool:
    """Hysteresis band around ``i_th`` plus a minimum on-time."""
    half = 0.5 * params.hysteresis
    if state.overcurrent:
        state.on_time += dt
        if i_mag < params.i_th - half and state.on_time >= params.hold_time:
            state.overcurrent = False
    elif i_mag >= params.i_th + half:
        state.overcurrent = True
        state.on_time = 0.0
    return state.overcurrent


def select_impedance(
    strategy: Strategy, tva, vav, overcurrent: bool, params: LimiterParams
) -> tuple[tuple[float, float], bool]:
    """Impedance pair to apply and whether it is the limiting one.

    Returns the nominal pair with ``False`` outside overcurrent and whenever
    the strategy asks for less impedance than the nominal admittance has.
    """
    if not overcurrent:
        return params.nominal_pair, False
    if strategy is Strategy.TVA:
        pair = tva
    elif strategy is Strategy.VAV:
        pair = vav
    else:
        pair = htva_select(tva, vav, overcurrent, params)
    r_nom, x_nom = params.nominal_pair
    if math.hypot(pair[0], pair[1]) < math.hypot(r_nom, x_nom):
        return params.nominal_pair, False
    return pair, True


def limiter_step(
    state: LimiterState,
    v_gfm,
    v_t,
    v_o,
    i_c,
    params: LimiterParams,
    strategy: Strategy,
    dt: float,
) -> tuple[SpaceVector, LimiterOutput]:
    i_mag = math.hypot(i_c[0], i_c[1])
    ref = v_o if params.dv_source == "v_o" else v_t
    dv_mag = math.hypot(v_gfm[0] - ref[0], v_gfm[1] - ref[1])

    overcurrent = update_overcurrent(state, i_mag, params, dt)
    sigma = vtvr_sigma(state.vtvr, 1.0 if overcurrent else 0.0, params)
    tva = tva_impedance(i_mag, params, sigma)
    vav = vav_impedance(dv_mag, i_mag, params, sigma)
    (r, x), limiting = select_impedance(strategy, tva, vav, overcurrent, params)

    i_ref = admittance_step(state.adm, v_gfm, v_t, r, x, dt)
    out = LimiterOutput(
        r=r,
        l=x,
        z_tva=math.hypot(tva[0], tva[1]),
        z_vav=math.hypot(vav[0], vav[1]),
        sigma_now=sigma,
        overcurrent=limiting,
        latched=overcurrent,
    )
    state.last = out
    return i_ref, out


def qss_current_tva(dv_mag: float, params: LimiterParams) -> float | None:
    """Quasi-steady current magnitude under the threshold impedance.

    Solves ``k_r sqrt(sigma^2+1) i (i - i_th) = dv`` for the root above
    ``i_th``.  Returns ``None`` when no drive exists (``dv == 0``).
    """
    if dv_mag < 0:
        raise ValueError("dv must be non-negative")
    if dv_mag == 0.0:
        return None
    c = params.v_n / (params.i_max * (params.i_max - params.i_th))
    return 0.5 * (params.i_th + math.sqrt(params.i_th**2 + 4.0 * dv_mag / c))


def qss_current_vav(dv_mag: float, params: LimiterParams) -> float:
    """Quasi-steady current under the voltage-information impedance: ``i_max``."""
    if dv_mag < 0:
        raise ValueError("dv must be non-negative")
    return params.i_max
