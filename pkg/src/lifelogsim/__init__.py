"""Simulator and lifelog pipeline for a solar-harvesting, intermittently
recording wearable logger."""

from .config import ConfigError, DeviceConfig, default_config, parse_config
from .environment import Scenario, ScenarioError, load_bundled, parse_scenario
from .recorder import RecordLog, Sample, export_csv, import_csv
from .simulator import Mode, PowerTrace, ZeroEnergyReport, run, zero_energy_rate

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DeviceConfig",
    "Mode",
    "PowerTrace",
    "RecordLog",
    "Sample",
    "Scenario",
    "ScenarioError",
    "ZeroEnergyReport",
    "default_config",
    "export_csv",
    "import_csv",
    "load_bundled",
    "parse_config",
    "parse_scenario",
    "run",
    "zero_energy_rate",
]
