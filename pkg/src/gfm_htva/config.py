"""Scenario configuration: INI-style text, validation and built-in presets.

Format::

    [base]     s_base, v_base, f_base
    [plant]    r_f, l_f, c_f, r_g1, l_g1, r_g2, l_g2, v_grid, clear_tau
    [droop]    m_p, m_q, p_set, q_set, v_ref, omega_ref, omega_f,
               kp, ki, v_ceiling, ff_cutoff (current loop of the GFM controller)
    [limiter]  strategy, i_max, i_th, sigma_ss, sigma_tr, v_n, r_nom, l_nom,
               omega_d, hysteresis, hold_time, dv_source
    [events]   event1 = fault_on 0.0 5.2
               event2 = fault_off 0.8
               event3 = phase_jump 0.0 -110
    [sim]      duration, dt, decimation, warmup

Every key is optional and defaults to the values of the built-in presets.
Unknown sections or keys are rejected.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, replace

from .control import CurrentControlParams, DroopParams
from .frames import PerUnitBase
from .limiter import LimiterParams, Strategy
from .plant import Event, PlantParams, calibrate_fault

EVENT_KINDS = ("fault_on", "fault_off", "phase_jump")
PRESETS = ("testcase1", "testcase2", "healthy", "small_jump")


class ConfigError(ValueError):
    """Invalid scenario text or values.  ``field`` names the offending key."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if field is not None:
            prefix += f"{field}: "
        super().__init__(prefix + message)


@dataclass(frozen=True)
class SimSettings:
    duration: float = 6.0
    dt: float = 50e-6
    decimation: int = 10
    warmup: float = 2.0


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "custom"
    base: PerUnitBase = field(default_factory=PerUnitBase)
    plant: PlantParams = field(default_factory=PlantParams)
    droop: DroopParams = field(default_factory=DroopParams)
    current: CurrentControlParams = field(default_factory=CurrentControlParams)
    limiter: LimiterParams = field(default_factory=LimiterParams)
    strategy: Strategy = Strategy.HTVA
    events: tuple[Event, ...] = ()
    sim: SimSettings = field(default_factory=SimSettings)
    v_grid: float = 1.0
    clear_tau: float = 2e-3

    def __post_init__(self):
        validate(self)

    def with_strategy(self, strategy) -> "ScenarioConfig":
        if isinstance(strategy, str):
            strategy = Strategy.parse(strategy)
        return replace(self, strategy=strategy)


# (section, key) -> (object attribute path, type)
_KEYS: dict[tuple[str, str], tuple[str, type]] = {}
for _k in ("s_base", "v_base", "f_base"):
    _KEYS[("base", _k)] = (f"base.{_k}", float)
for _k in ("r_f", "l_f", "c_f", "r_g1", "l_g1", "r_g2", "l_g2"):
    _KEYS[("plant", _k)] = (f"plant.{_k}", float)
_KEYS[("plant", "v_grid")] = ("v_grid", float)
_KEYS[("plant", "clear_tau")] = ("clear_tau", float)
for _k in ("m_p", "m_q", "p_set", "q_set", "v_ref", "omega_ref", "omega_f"):
    _KEYS[("droop", _k)] = (f"droop.{_k}", float)
for _k in ("kp", "ki", "v_ceiling", "ff_cutoff"):
    _KEYS[("droop", _k)] = (f"current.{_k}", float)
_KEYS[("limiter", "strategy")] = ("strategy", str)
for _k in ("i_max", "i_th", "sigma_ss", "sigma_tr", "v_n", "r_nom", "l_nom", "omega_d", "hysteresis", "hold_time"):
    _KEYS[("limiter", _k)] = (f"limiter.{_k}", float)
_KEYS[("limiter", "dv_source")] = ("limiter.dv_source", str)
for _k in ("duration", "dt", "warmup"):
    _KEYS[("sim", _k)] = (f"sim.{_k}", float)
_KEYS[("sim", "decimation")] = ("sim.decimation", int)

SECTIONS = ("base", "plant", "droop", "limiter", "events", "sim")


def validate(cfg: ScenarioConfig) -> None:
    s = cfg.sim
    if not (s.duration > 0 and math.isfinite(s.duration)):
        raise ConfigError("must be positive", "sim.duration")
    if not (s.dt > 0 and math.isfinite(s.dt)):
        raise ConfigError("must be positive", "sim.dt")
    if s.decimation < 1:
        raise ConfigError("must be >= 1", "sim.decimation")
    if s.warmup < 0:
        raise ConfigError("must be non-negative", "sim.warmup")
    if not cfg.v_grid > 0:
        raise ConfigError("must be positive", "plant.v_grid")
    if cfg.clear_tau < 0:
        raise ConfigError("must be non-negative", "plant.clear_tau")
    times = [e.time for e in cfg.events]
    if times != sorted(times):
        raise ConfigError("events must be sorted by time", "events")
    for e in cfg.events:
        if e.kind not in EVENT_KINDS:
            raise ConfigError(f"unknown event kind {e.kind!r}", "events")
        if e.time < 0 or e.time > s.duration:
            raise ConfigError(f"event time {e.time} outside [0, duration]", "events")
        if e.kind == "fault_on" and not e.value >= 0:
            raise ConfigError("fault conductance must be non-negative", "events")
    for rate in (cfg.droop.omega_f, cfg.limiter.omega_d, cfg.current.ff_cutoff):
        if rate * s.dt >= 2.0:
            raise ConfigError("filter cut-off too high for the time step", "sim.dt")


def _get(cfg: ScenarioConfig, path: str):
    obj = cfg
    for part in path.split("."):
        obj = getattr(obj, part)
    return obj


def _build(cfg: ScenarioConfig, updates: dict[str, object]) -> ScenarioConfig:
    """Return a copy of ``cfg`` with dotted attribute paths replaced.

    Updates are grouped per sub-record so invariants are checked once on the
    final values, not on every intermediate assignment.
    """
    top: dict[str, object] = {}
    nested: dict[str, dict[str, object]] = {}
    for path, value in updates.items():
        head, _, rest = path.partition(".")
        if rest:
            nested.setdefault(head, {})[rest] = value
        elif head == "strategy":
            try:
                top[head] = Strategy.parse(str(value))
            except ValueError as exc:
                raise ConfigError(str(exc), "limiter.strategy") from None
        else:
            top[head] = value
    for head, kw in nested.items():
        try:
            top[head] = replace(getattr(cfg, head), **kw)
        except ValueError as exc:
            raise ConfigError(str(exc), _section_of(head, kw)) from None
    return replace(cfg, **top)


def _section_of(head: str, kw: dict[str, object]) -> str:
    for (sec, key), (path, _) in _KEYS.items():
        if path.startswith(head + ".") and path.split(".", 1)[1] in kw:
            return f"{sec}.{key}" if len(kw) == 1 else sec
    return head


def _coerce(raw: str, typ: type, key: str, line: int | None):
    raw = raw.strip()
    if typ is str:
        return raw
    try:
        value = typ(raw)
    except ValueError:
        raise ConfigError(f"expected {typ.__name__}, got {raw!r}", key, line) from None
    if typ is float and not math.isfinite(value):
        raise ConfigError(f"non-finite value {raw!r}", key, line)
    return value


def _parse_event(raw: str, key: str, line: int | None) -> Event:
    parts = raw.split()
    if not parts or parts[0] not in EVENT_KINDS:
        raise ConfigError(f"unknown event kind in {raw!r} (valid: {', '.join(EVENT_KINDS)})", key, line)
    kind = parts[0]
    want = 2 if kind == "fault_off" else 3
    if len(parts) != want:
        raise ConfigError(f"{kind} takes {want - 1} numbers, got {raw!r}", key, line)
    nums = [_coerce(p, float, key, line) for p in parts[1:]]
    return Event(kind, nums[0], nums[1] if len(nums) > 1 else 0.0)


def _line_of(text: str, section: str, key: str | None) -> int | None:
    current = None
    for n, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        m = re.match(r"\[(.+)\]", stripped)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return n
            continue
        if current == section and key is not None:
            if re.match(rf"{re.escape(key)}\s*[=:]", stripped):
                return n
    return None


def _apply_omega_base(cfg: ScenarioConfig) -> ScenarioConfig:
    wb = cfg.base.omega_base
    return replace(
        cfg,
        plant=replace(cfg.plant, omega_base=wb),
        droop=replace(cfg.droop, omega_base=wb),
        current=replace(cfg.current, omega_base=wb, l_f=cfg.plant.l_f),
        limiter=replace(cfg.limiter, omega_base=wb),
    )


def load_config(text: str, base: ScenarioConfig | None = None, name: str = "custom") -> ScenarioConfig:
    """Parse scenario text on top of ``base`` (defaults when omitted)."""
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        if line is None and getattr(exc, "errors", None):
            line = exc.errors[0][0]
        raise ConfigError(str(exc).splitlines()[0], None, line) from None

    cfg = base if base is not None else ScenarioConfig()
    updates: dict[str, object] = {}
    events: list[tuple[int, Event]] | None = None
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]", section, _line_of(text, section, None))
        for key, raw in parser.items(section):
            line = _line_of(text, section, key)
            dotted = f"{section}.{key}"
            if section == "events":
                if not re.fullmatch(r"event\d+", key):
                    raise ConfigError("event keys must be event<N>", dotted, line)
                events = events if events is not None else []
                events.append((int(key[5:]), _parse_event(raw, dotted, line)))
                continue
            if (section, key) not in _KEYS:
                raise ConfigError("unknown key", dotted, line)
            path, typ = _KEYS[(section, key)]
            updates[path] = _coerce(raw, typ, dotted, line)
    if events is not None:
        events.sort(key=lambda p: p[0])
        updates["events"] = tuple(e for _, e in events)
    updates["name"] = name
    try:
        cfg = _build(cfg, updates)
    except ConfigError as exc:
        if exc.field and "." in exc.field:
            sec, key = exc.field.split(".", 1)
            msg = str(exc).split(": ", 1)[-1]
            raise ConfigError(msg, exc.field, _line_of(text, sec, key)) from None
        raise
    return _apply_omega_base(cfg)


def apply_override(cfg: ScenarioConfig, assignment: str) -> ScenarioConfig:
    """Apply ``section.key=value`` to ``cfg``."""
    if "=" not in assignment:
        raise ConfigError(f"override must look like section.key=value, got {assignment!r}")
    lhs, raw = assignment.split("=", 1)
    lhs = lhs.strip()
    section, _, key = lhs.partition(".")
    if (section, key) not in _KEYS:
        raise ConfigError("unknown key", lhs)
    path, typ = _KEYS[(section, key)]
    return _apply_omega_base(_build(cfg, {path: _coerce(raw, typ, lhs, None)}))


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, Strategy):
        return value.value
    return str(value)


def dump_config(cfg: ScenarioConfig) -> str:
    """Serialize ``cfg`` to the text format; ``load_config`` reads it back."""
    lines: list[str] = []
    for section in SECTIONS:
        lines.append(f"[{section}]")
        if section == "events":
            for n, e in enumerate(cfg.events, start=1):
                nums = [e.time] if e.kind == "fault_off" else [e.time, e.value]
                lines.append(f"event{n} = {e.kind} " + " ".join(repr(float(v)) for v in nums))
        else:
            for (sec, key), (path, _) in _KEYS.items():
                if sec == section:
                    lines.append(f"{key} = {_fmt(_get(cfg, path))}")
        lines.append("")
    return "\n".join(lines)


def preset(name: str) -> ScenarioConfig:
    """Built-in scenarios.  System and limiter parameters are the reference values."""
    cfg = _apply_omega_base(ScenarioConfig(name=name))
    if name == "testcase1":
        g = calibrate_fault(cfg.plant, 0.4)
        events = (Event("fault_on", 0.0, g), Event("fault_off", 0.8))
    elif name == "testcase2":
        events = (Event("phase_jump", 0.0, -110.0),)
    elif name == "healthy":
        events = ()
    elif name == "small_jump":
        events = (Event("phase_jump", 0.0, -5.0),)
    else:
        raise ConfigError(f"unknown preset {name!r} (valid: {', '.join(PRESETS)})", "preset")
    return replace(cfg, events=events)


def config_fields(cfg: ScenarioConfig) -> dict[str, object]:
    """Flat ``section.key -> value`` view, used for dumps and CLI listings."""
    out = {f"{sec}.{key}": _get(cfg, path) for (sec, key), (path, _) in _KEYS.items()}
    for n, e in enumerate(cfg.events, start=1):
        out[f"events.event{n}"] = (e.kind, e.time, e.value)
    return out


__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "SimSettings",
    "load_config",
    "dump_config",
    "apply_override",
    "preset",
    "PRESETS",
    "config_fields",
]
