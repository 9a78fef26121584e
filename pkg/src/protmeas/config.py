"""TOML configuration loading for systems, profiles, pointers, and runs."""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .model import PointerModel, SystemModel, build_pointer
from .profiles import CouplingProfile


class ConfigError(ValueError):
    """Configuration parse or validation failure, with a field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.field_path = path


def load_config(path: str | Path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(str(path), "config file not found")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(path), f"TOML parse error: {exc}")


def _complex_entry(value, where: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(
        isinstance(v, (int, float)) for v in value
    ):
        return complex(value[0], value[1])
    raise ConfigError(where, f"expected a number or [re, im] pair, got {value!r}")


def parse_system(table: dict, where: str = "system") -> SystemModel:
    try:
        energies = np.asarray(table["energies"], dtype=float)
    except KeyError:
        raise ConfigError(f"{where}.energies", "missing")
    except (TypeError, ValueError):
        raise ConfigError(f"{where}.energies", "must be a list of numbers")
    raw = table.get("observable")
    if raw is None:
        raise ConfigError(f"{where}.observable", "missing")
    d = energies.size
    rows = raw
    if not isinstance(rows, list) or len(rows) != d:
        raise ConfigError(f"{where}.observable", f"must be a {d}x{d} matrix (non-square or wrong size)")
    O = np.zeros((d, d), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != d:
            raise ConfigError(f"{where}.observable[{i}]", f"row must have {d} entries")
        for j, entry in enumerate(row):
            O[i, j] = _complex_entry(entry, f"{where}.observable[{i}][{j}]")
    level = table.get("initial_level", 0)
    if not isinstance(level, int):
        raise ConfigError(f"{where}.initial_level", "must be an integer index")
    from .model import ModelValidationError
    try:
        return SystemModel(energies=energies, observable=O, initial_level=level)
    except ModelValidationError as exc:
        raise ConfigError(where, str(exc))


_KIND_ALIASES = {
    "boxcar": "boxcar", "constant": "boxcar",
    "trapezoid": "trapezoid",
    "triangle": "triangle",
    "raised-cosine": "raised-cosine", "raised_cosine": "raised-cosine",
    "sampled": "sampled",
}


def parse_profile(table: dict, where: str = "profile",
                  base_dir: Path | None = None) -> CouplingProfile:
    kind = _KIND_ALIASES.get(str(table.get("kind", "")).lower())
    if kind is None:
        raise ConfigError(f"{where}.kind", f"unknown profile kind {table.get('kind')!r}")
    area = float(table.get("area", 1.0))
    from .profiles import ProfileError
    try:
        if kind == "sampled":
            csv_path = table.get("csv")
            if csv_path is None:
                raise ConfigError(f"{where}.csv", "sampled profile needs a csv path")
            p = Path(csv_path)
            if base_dir is not None and not p.is_absolute():
                p = base_dir / p
            return CouplingProfile.from_csv(p, area=area)
        T = table.get("T", table.get("duration"))
        if T is None:
            raise ConfigError(f"{where}.T", "missing duration")
        if kind == "trapezoid":
            f = table.get("turn_on_fraction")
            if f is None:
                raise ConfigError(f"{where}.turn_on_fraction", "missing for trapezoid")
            return CouplingProfile.trapezoid(float(T), float(f), area=area)
        return CouplingProfile(kind, float(T), area=area)
    except ProfileError as exc:
        raise ConfigError(where, str(exc))


def parse_pointer(table: dict, where: str = "pointer") -> PointerModel:
    apparatus = table.get("apparatus", "static")
    mass = None
    if isinstance(apparatus, dict):
        free = apparatus.get("free")
        if not isinstance(free, dict) or "mass" not in free:
            raise ConfigError(f"{where}.apparatus", "expected 'static' or {free = {mass = ...}}")
        apparatus, mass = "free", float(free["mass"])
    from .model import ModelValidationError
    try:
        return build_pointer(
            x0=float(table.get("x0", 0.0)),
            sigma_x=float(table.get("sigma_x", 1.0)),
            grid_size=int(table.get("grid_size", 64)),
            grid_span=float(table.get("grid_span", 4.0)),
            apparatus=apparatus, mass=mass,
        )
    except ModelValidationError as exc:
        raise ConfigError(where, str(exc))


def load_system(path: str | Path) -> SystemModel:
    cfg = load_config(path)
    return parse_system(cfg.get("system", cfg), where=f"{path}:system")


def load_profile(path: str | Path) -> CouplingProfile:
    cfg = load_config(path)
    return parse_profile(cfg.get("profile", cfg), where=f"{path}:profile",
                         base_dir=Path(path).parent)
