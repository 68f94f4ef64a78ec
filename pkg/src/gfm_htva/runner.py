"""Fixed-step co-simulation of plant, GFM controller and current limiter."""
from __future__ import annotations

import cmath
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .config import ScenarioConfig
from .control import ControllerState, current_control_step, droop_laws, droop_step, power_calc, synthesize_vgfm
from .limiter import LimiterState, limiter_step
from .plant import GridEventState, PlantState, SimulationBlowUp, apply_event, plant_step

log = logging.getLogger(__name__)

CSV_COLUMNS = ("t", "i_c_mag", "v_o_mag", "dv_mag", "z_applied", "sigma", "p", "q", "overcurrent")
# kept in memory for diagnostics, not written to CSV
EXTRA_COLUMNS = ("z_tva", "z_vav", "omega_gfm")
SETTLE_BAND = 0.02


@dataclass
class Metrics:
    peak_i: float
    time_above_imax: float
    settle_time: float | None  # None: not settled
    final_p: float
    final_q: float
    blow_up: bool = False
    pre_event_p: float | None = None
    pre_event_i: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SimResult:
    config: ScenarioConfig
    columns: dict[str, np.ndarray]
    metrics: Metrics | None = None
    error: str | None = None
    full: dict[str, np.ndarray] | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.columns["t"])


@dataclass
class _Init:
    plant: PlantState
    ctrl: ControllerState
    lim: LimiterState
    v_t: tuple[float, float]


def steady_state_phasors(cfg: ScenarioConfig) -> dict[str, complex]:
    """Pre-event operating point with the admittance at its nominal elements.

    Solves for the GFM internal voltage angle and magnitude such that the
    droop laws hold at grid frequency (P equal to its set-point), using the
    quasi-steady circuit: internal voltage behind the nominal admittance and
    the filter inductor, capacitor at the PCC, merged grid segments.
    """
    p, lp = cfg.plant, cfg.limiter
    z_a = complex(lp.r_nom, lp.l_nom) + complex(p.r_f, p.l_f)
    z_g = p.z_g1 + p.z_g2
    y_c = 1j * p.c_f
    v_g = complex(cfg.v_grid, 0.0)

    def solve(delta: float, mag: float):
        e = cmath.rect(mag, delta)
        v_o = (e / z_a + v_g / z_g) / (1 / z_a + y_c + 1 / z_g)
        i_c = (e - v_o) / z_a
        i_o = (v_o - v_g) / z_g
        s = v_o * i_o.conjugate()
        return e, v_o, i_c, i_o, s.real, s.imag

    mag = cfg.droop.v_ref
    delta = 0.0
    for _ in range(200):
        delta = brentq(lambda d: solve(d, mag)[4] - cfg.droop.p_set, -1.5, 1.5, xtol=1e-15)
        q = solve(delta, mag)[5]
        _, new_mag = droop_laws(cfg.droop, cfg.droop.p_set, q)
        if abs(new_mag - mag) < 1e-14:
            mag = new_mag
            break
        mag = new_mag
    e, v_o, i_c, i_o, pp, qq = solve(delta, mag)
    v_t = v_o + complex(p.r_f, p.l_f) * i_c
    return {"e": e, "v_o": v_o, "i_c": i_c, "i_o": i_o, "v_t": v_t, "p": pp, "q": qq}


def initial_state(cfg: ScenarioConfig) -> _Init:
    ph = steady_state_phasors(cfg)
    dt = cfg.sim.dt
    t0 = -cfg.sim.warmup
    x = np.array(
        [
            [ph["i_c"].real, ph["i_c"].imag],
            [ph["v_o"].real, ph["v_o"].imag],
            [ph["i_o"].real, ph["i_o"].imag],
            [ph["i_o"].real, ph["i_o"].imag],
        ]
    )
    plant = PlantState(x, 0.0, t0)

    ctrl = ControllerState.create(cfg.droop, cfg.current, dt)
    ctrl.p_filt.preload(ph["p"])
    ctrl.q_filt.preload(ph["q"])
    ctrl.theta_gfm = cmath.phase(ph["e"])
    ctrl.v_gfm = abs(ph["e"])
    ctrl.omega_gfm = cfg.droop.omega_ref
    ctrl.ff_alpha.preload(ph["v_o"].real)
    ctrl.ff_beta.preload(ph["v_o"].imag)
    # integrators hold the resistive drop of the filter in the GFM frame
    rot = cmath.rect(1.0, -ctrl.theta_gfm)
    drop = cfg.plant.r_f * ph["i_c"] * rot
    ctrl.pi_d.integ = drop.real
    ctrl.pi_q.integ = drop.imag

    lim = LimiterState.create(cfg.limiter, dt)
    lim.adm.i_alpha = ph["i_c"].real
    lim.adm.i_beta = ph["i_c"].imag
    drive = ph["e"] - ph["v_t"]
    lim.adm.u_alpha = drive.real
    lim.adm.u_beta = drive.imag
    return _Init(plant, ctrl, lim, (ph["v_t"].real, ph["v_t"].imag))


def run_simulation(cfg: ScenarioConfig, keep_full: bool = False) -> SimResult:
    """Simulate ``cfg`` from ``-warmup`` to ``duration``.

    Returns the decimated series plus metrics computed at full rate.  A
    numerical blow-up is not raised; it is reported through ``error`` and
    ``metrics.blow_up`` together with the partial series.
    """
    dt = cfg.sim.dt
    t0 = -cfg.sim.warmup
    n_steps = int(round((cfg.sim.duration - t0) / dt))
    init = initial_state(cfg)
    plant, ctrl, lim = init.plant, init.ctrl, init.lim
    v_t = init.v_t
    grid = GridEventState(v_grid_mag=cfg.v_grid, clear_tau=cfg.clear_tau)
    pending = sorted(
        ((int(round((e.time - t0) / dt)), n, e) for n, e in enumerate(cfg.events)),
        key=lambda item: (item[0], item[1]),
    )
    pending_idx = 0

    plant_p, droop_p, cc_p, lim_p = cfg.plant, cfg.droop, cfg.current, cfg.limiter
    strategy = cfg.strategy
    names = CSV_COLUMNS + EXTRA_COLUMNS
    buf = np.empty((n_steps, len(names)))
    error = None
    n_done = 0
    hypot = math.hypot
    try:
        for k in range(n_steps):
            while pending_idx < len(pending) and pending[pending_idx][0] <= k:
                grid = apply_event(grid, pending[pending_idx][2])
                pending_idx += 1
            plant = plant_step(plant, plant_p, grid, v_t, dt)
            x = plant.x
            i_c = (x[0, 0], x[0, 1])
            v_o = (x[1, 0], x[1, 1])
            i_o = (x[2, 0], x[2, 1])
            p, q = power_calc(v_o, i_o)
            omega, v_mag = droop_step(ctrl, droop_p, p, q, dt)
            v_gfm = synthesize_vgfm(v_mag, ctrl.theta_gfm)
            i_ref, out = limiter_step(lim, v_gfm, v_t, v_o, i_c, lim_p, strategy, dt)
            v_t = current_control_step(ctrl, i_ref, i_c, v_o, ctrl.theta_gfm, cc_p, dt)
            buf[k] = (
                t0 + (k + 1) * dt,
                hypot(i_c[0], i_c[1]),
                hypot(v_o[0], v_o[1]),
                hypot(v_gfm[0] - v_o[0], v_gfm[1] - v_o[1]),
                hypot(out.r, out.l),
                out.sigma_now,
                p,
                q,
                1.0 if out.overcurrent else 0.0,
                out.z_tva,
                out.z_vav,
                omega,
            )
            n_done = k + 1
    except (SimulationBlowUp, ValueError) as exc:
        error = f"numerical blow-up at t = {t0 + (n_done + 1) * dt:.6f} s: {exc}"
        log.error(error)

    full = {name: buf[:n_done, j].copy() for j, name in enumerate(names)}
    dec = cfg.sim.decimation
    columns = {name: arr[dec - 1 :: dec].copy() for name, arr in full.items()}
    metrics = compute_metrics(full, cfg, sample_period=dt) if n_done else None
    if metrics is not None and error is not None:
        metrics.blow_up = True
    if metrics is not None and metrics.pre_event_p is not None:
        p_set = cfg.droop.p_set
        if abs(metrics.pre_event_p - p_set) > SETTLE_BAND * abs(p_set):
            log.warning("warm-up did not settle: P = %.4f at t = 0-", metrics.pre_event_p)
    return SimResult(cfg, columns, metrics, error, full if keep_full else None)


def _event_window_start(cfg: ScenarioConfig) -> float:
    return cfg.events[0].time if cfg.events else 0.0


def compute_metrics(series: dict[str, np.ndarray], cfg: ScenarioConfig, sample_period: float | None = None) -> Metrics:
    """Scalar metrics over the post-event window (t >= first event time)."""
    t = np.asarray(series["t"], dtype=float)
    if t.size == 0:
        raise ValueError("cannot compute metrics of an empty series")
    if sample_period is None:
        sample_period = cfg.sim.dt * cfg.sim.decimation
    i_mag = np.asarray(series["i_c_mag"], dtype=float)
    p = np.asarray(series["p"], dtype=float)
    q = np.asarray(series["q"], dtype=float)

    start = _event_window_start(cfg)
    # half-sample guard so a sample stamped exactly at the event counts
    win = t >= start - 0.5 * sample_period
    pre = ~win
    i_win = i_mag[win]
    peak = float(i_win.max()) if i_win.size else 0.0
    above = int(np.count_nonzero(i_win > cfg.limiter.i_max))

    last_event = cfg.events[-1].time if cfg.events else start
    after = t >= last_event - 0.5 * sample_period
    p_after = p[after]
    settle: float | None
    if p_after.size == 0:
        settle = None
    else:
        p_set = cfg.droop.p_set
        out_band = np.abs(p_after - p_set) > SETTLE_BAND * abs(p_set)
        if out_band[-1]:
            settle = None
        elif not out_band.any():
            settle = 0.0
        else:
            last_out = int(np.flatnonzero(out_band)[-1])
            settle = float(t[after][last_out + 1] - last_event)

    return Metrics(
        peak_i=peak,
        time_above_imax=above * sample_period,
        settle_time=settle,
        final_p=float(p[-1]),
        final_q=float(q[-1]),
        pre_event_p=float(p[pre][-1]) if pre.any() else None,
        pre_event_i=float(i_mag[pre][-1]) if pre.any() else None,
    )


def write_csv(result: SimResult, path) -> None:
    path = Path(path)
    cols = [np.asarray(result.columns[name]) for name in CSV_COLUMNS]
    try:
        with path.open("w", newline="") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for row in zip(*cols):
                fh.write(",".join(format(float(v), ".17g") for v in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_csv(path) -> dict[str, np.ndarray]:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().rstrip("\n").split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"{path}: unexpected header {header}")
    data = np.array([[float(v) for v in r] for r in rows], dtype=float).reshape(len(rows), len(header))
    return {name: data[:, j].copy() for j, name in enumerate(header)}


def write_metrics(metrics: Metrics, path) -> None:
    path = Path(path)
    try:
        path.write_text(json.dumps(metrics.to_dict(), indent=2, sort_keys=False) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
