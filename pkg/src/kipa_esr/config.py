"""INI configuration: packaged defaults, an optional user file and ``--set`` overrides.

Every key must already exist in the packaged defaults; anything else is
rejected before a command starts computing.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

#: Non-numeric words accepted for specific numeric keys.
KEYWORDS = {
    ("kipa", "kappa"): {"auto"},
    ("kipa", "gamma"): {"auto"},
    ("kipa", "xi"): {"auto"},
    ("noise", "T_attenuator_K"): {"auto"},
    ("budget", "beta_b"): {"auto"},
    ("budget", "V_d_um3"): {"model"},
}
#: Keys holding free text (paths, names, lists).
TEXT_KEYS = {
    ("spin", "operators"), ("spin", "output"), ("network", "network_file"),
    ("noise", "measurement_file"), ("budget", "snr1"), ("budget", "snr1_labels"),
    ("fit", "input_file"), ("fit", "x_col"), ("fit", "y_col"),
    ("echo", "signal_file"), ("echo", "blank_file"),
}


class ConfigError(ValueError):
    """Malformed or unknown configuration."""


def _parser() -> configparser.ConfigParser:
    p = configparser.ConfigParser(interpolation=None)
    p.optionxform = str  # keep key case
    return p


def _defaults() -> configparser.ConfigParser:
    p = _parser()
    p.read_string(resources.files("kipa_esr").joinpath("data/defaults.ini").read_text())
    return p


@dataclass
class Config:
    values: dict[str, dict[str, str]] = field(default_factory=dict)

    def raw(self, section: str, key: str) -> str:
        try:
            return self.values[section][key]
        except KeyError:
            raise ConfigError(f"unknown key {section}.{key}") from None

    def float(self, section: str, key: str) -> float:
        return float(self.raw(section, key))

    def int(self, section: str, key: str) -> int:
        v = self.float(section, key)
        if v != int(v):
            raise ConfigError(f"{section}.{key} must be an integer")
        return int(v)

    def optional(self, section: str, key: str) -> float | None:
        """Numeric value, or None for the keyword (auto/model)."""
        v = self.raw(section, key)
        return None if v in KEYWORDS.get((section, key), ()) else float(v)

    def text(self, section: str, key: str) -> str:
        return self.raw(section, key)

    def floats(self, section: str, key: str) -> list[float]:
        return [float(s) for s in self.raw(section, key).split(",") if s.strip()]

    def words(self, section: str, key: str) -> list[str]:
        return [s.strip() for s in self.raw(section, key).split(",") if s.strip()]

    def path(self, section: str, key: str, required: bool = True) -> Path | None:
        v = self.raw(section, key).strip()
        if not v:
            if required:
                raise ConfigError(f"{section}.{key} must name an input file")
            return None
        p = Path(v)
        if not p.is_file():
            raise ConfigError(f"{section}.{key}: file not found: {v}")
        return p


def _validate(section: str, key: str, value: str) -> None:
    if (section, key) in TEXT_KEYS:
        return
    if value in KEYWORDS.get((section, key), ()):
        return
    try:
        float(value)
    except ValueError:
        allowed = sorted(KEYWORDS.get((section, key), ()))
        extra = f" or one of {allowed}" if allowed else ""
        raise ConfigError(f"{section}.{key} = {value!r} is not a number{extra}") from None


def _resolve_key(defaults: dict[str, dict[str, str]], key: str) -> tuple[str, str]:
    if "." in key:
        section, name = key.split(".", 1)
        if section not in defaults or name not in defaults[section]:
            raise ConfigError(f"unknown key {key}")
        return section, name
    hits = [s for s, keys in defaults.items() if key in keys]
    if not hits:
        raise ConfigError(f"unknown key {key}")
    if len(hits) > 1:
        raise ConfigError(f"key {key} is ambiguous; use one of {[f'{s}.{key}' for s in hits]}")
    return hits[0], key


def load_config(path: str | Path | None = None, overrides: list[str] | tuple[str, ...] = ()) -> Config:
    base = _defaults()
    values = {s: dict(base[s]) for s in base.sections()}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        user = _parser()
        try:
            user.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        for section in user.sections():
            if section not in values:
                raise ConfigError(f"{path}: unknown section [{section}]")
            for key, value in user[section].items():
                if key not in values[section]:
                    raise ConfigError(f"{path}: unknown key {section}.{key}")
                values[section][key] = value
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        section, name = _resolve_key(values, key)
        values[section][name] = value
    for section, keys in values.items():
        for key, value in keys.items():
            _validate(section, key, value)
    return Config(values)
