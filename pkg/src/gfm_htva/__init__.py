"""Grid-forming inverter simulator with virtual-admittance current limiting."""
from .config import ConfigError, ScenarioConfig, apply_override, dump_config, load_config, preset
from .limiter import Strategy, qss_current_tva, qss_current_vav
from .runner import Metrics, SimResult, compute_metrics, read_csv, run_simulation, write_csv, write_metrics

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "Strategy",
    "Metrics",
    "SimResult",
    "apply_override",
    "compute_metrics",
    "dump_config",
    "load_config",
    "preset",
    "qss_current_tva",
    "qss_current_vav",
    "read_csv",
    "run_simulation",
    "write_csv",
    "write_metrics",
]

__version__ = "0.1.0"
