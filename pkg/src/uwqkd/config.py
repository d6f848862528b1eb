"""Loading system, water and scenario parameters from INI-style text.

Values in files carry their unit in the key name (``theta_deg``,
``gate_time_ps``...). They are converted to SI radians/metres/seconds here,
once, and nowhere else. The built-in defaults are the reference parameter
table, written in the same format.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .channel_model import (
    SCENARIO_IRRADIANCE,
    WATER_PROFILES,
    SystemConfig,
    WaterProfile,
    correction_factor,
)
from .errors import DomainError

DEFAULT_CONFIG = """\
[system]
wavelength_nm = 530
theta_deg = 6
delta_deg = 180
filter_width_nm = 0.2
bit_period_ns = 40
gate_time_ps = 200
d1_cm = 30
d2_cm = 30
eta_alice = 0.5
eta_bob = 0.5
mu = 1
dark_count_hz = 60
k_inf_per_m = 0.08
depth_m = 80
e_det = 0.033

[scenarios]
1 = 1e-3
2 = 10
3 = 50
4 = 125
5 = 500

[water.clear]
alpha_per_m = 0.151
gamma_dep_per_m = 2.4e-6

[water.coastal]
alpha_per_m = 0.339
gamma_dep_per_m = 3.7e-6

[water.turbid]
alpha_per_m = 2.195
gamma_dep_per_m = 7.5e-6
"""

# key -> (SystemConfig field, multiplier to SI)
_SYSTEM_KEYS: dict[str, tuple[str, float]] = {
    "wavelength_nm": ("wavelength", 1e-9),
    "theta_deg": ("theta", math.pi / 180),
    "delta_deg": ("delta", math.pi / 180),
    "filter_width_nm": ("delta_lambda", 1e-9),
    "bit_period_ns": ("delta_t", 1e-9),
    "gate_time_ps": ("delta_t_prime", 1e-12),
    "d1_cm": ("d1", 1e-2),
    "d2_cm": ("d2", 1e-2),
    "eta_alice": ("eta_alice", 1.0),
    "eta_bob": ("eta_bob", 1.0),
    "mu": ("mu", 1.0),
    "dark_count_hz": ("dark_count_rate", 1.0),
    "k_inf_per_m": ("k_inf", 1.0),
    "depth_m": ("depth", 1.0),
    "e_det": ("e_det", 1.0),
    "t_corr": ("t_corr", 1.0),
    "surface_irradiance_w_m2": ("surface_irradiance", 1.0),
}


class ConfigError(DomainError):
    """Malformed or incomplete configuration text."""


@dataclass(frozen=True)
class Config:
    system: SystemConfig
    waters: dict[str, WaterProfile] = field(default_factory=lambda: dict(WATER_PROFILES))
    scenarios: dict[int, float] = field(default_factory=lambda: dict(SCENARIO_IRRADIANCE))

    def water(self, name: str) -> WaterProfile:
        try:
            return self.waters[name]
        except KeyError:
            raise DomainError(f"unknown water type {name!r}") from None

    def irradiance(self, scenario: int) -> float:
        try:
            return self.scenarios[scenario]
        except KeyError:
            raise DomainError(f"unknown scenario {scenario!r}") from None

    def with_scenario(self, scenario: int) -> SystemConfig:
        return replace(self.system, surface_irradiance=self.irradiance(scenario))


def _float(section: configparser.SectionProxy, key: str) -> float:
    raw = section[key]
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{section.name}] {key} = {raw!r} is not a number") from None


def parse_config(*texts: str) -> Config:
    """Parse configuration texts; later texts override earlier ones key by key."""
    parser = configparser.ConfigParser()
    for text in texts:
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from None

    if not parser.has_section("system"):
        raise ConfigError("missing [system] section")
    system = parser["system"]
    values: dict[str, float] = {}
    for key in system:
        if key not in _SYSTEM_KEYS:
            raise ConfigError(f"unknown key [system] {key}")
        name, scale = _SYSTEM_KEYS[key]
        values[name] = _float(system, key) * scale

    scenarios = dict(SCENARIO_IRRADIANCE)
    if parser.has_section("scenarios"):
        for key in parser["scenarios"]:
            try:
                number = int(key)
            except ValueError:
                raise ConfigError(f"scenario key {key!r} is not an integer") from None
            scenarios[number] = _float(parser["scenarios"], key)

    waters = dict(WATER_PROFILES)
    for section in parser.sections():
        if not section.startswith("water."):
            continue
        name = section.split(".", 1)[1]
        sec = parser[section]
        unknown = set(sec) - {"alpha_per_m", "gamma_dep_per_m"}
        if unknown:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")
        base = waters.get(name)
        alpha = _float(sec, "alpha_per_m") if "alpha_per_m" in sec else getattr(base, "alpha", None)
        gamma = (_float(sec, "gamma_dep_per_m") if "gamma_dep_per_m" in sec
                 else getattr(base, "gamma_dep", None))
        if alpha is None or gamma is None:
            raise ConfigError(f"[{section}] needs alpha_per_m and gamma_dep_per_m")
        waters[name] = WaterProfile(name, alpha, gamma)

    values.setdefault("surface_irradiance", scenarios[1])
    if "t_corr" not in values:
        if "d1" not in values:
            raise ConfigError("[system] needs d1_cm")
        values["t_corr"] = correction_factor(values["d1"])

    missing = set(SystemConfig.__dataclass_fields__) - set(values)
    if missing:
        raise ConfigError(f"[system] is missing {sorted(missing)}")
    return Config(system=SystemConfig(**values), waters=waters, scenarios=scenarios)


def load_config(path: str | Path | None = None) -> Config:
    """Built-in defaults, optionally overridden by the file at ``path``."""
    if path is None:
        return parse_config(DEFAULT_CONFIG)
    # the defaults never set t_corr, so it is re-derived from the final d1
    return parse_config(DEFAULT_CONFIG, Path(path).read_text(encoding="utf-8"))


def default_system(pupil: float = 0.30, scenario: int = 1, **overrides) -> SystemConfig:
    """Reference system parameters with both pupils set to ``pupil`` metres.

    The correction exponent follows the pupil unless ``t_corr`` is passed.
    """
    cfg = load_config()
    sys = replace(cfg.system, d1=pupil, d2=pupil,
                  surface_irradiance=cfg.irradiance(scenario))
    if "t_corr" not in overrides:
        overrides["t_corr"] = correction_factor(pupil)
    return replace(sys, **overrides)
