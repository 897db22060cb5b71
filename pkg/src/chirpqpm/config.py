"""Run configuration files: sectioned ``key = value [unit]`` text.

    # comment
    [structure]
    kind = photonic          ; photonic | aperiodic | periodic
    n_layers = 5
    total_length = 8000 um
    alpha = 1200 cm^-2
    [dispersion]
    lambda0 = 0.458 um
    B = 0.3
    dk0 = 0.0576 um^-1
    [grid]
    min = -0.35
    max = 0.35
    n_points = 8001

Values are converted to canonical units (um, 1/um, 1/um^2) on parsing, and
``dump`` writes canonical values with ``repr`` so a written config re-parses to
identical floats.  Every error carries the offending line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import (AperiodicPolingSpec, DispersionParams, PeriodicPolingSpec, PhotonicChirpSpec,
                    ValidationError)
from .spectra import FrequencyGrid, Structure

__all__ = ["ConfigError", "RunConfig", "parse", "load", "dump", "METHOD_NAMES"]

SECTIONS = ("structure", "dispersion", "grid", "output", "sweep", "optimize", "factor")
METHOD_NAMES = {"closed": "closed_form", "general": "general_sum", "double": "double_sum"}
FORMATS = ("csv", "jsonl")

# decimal exponent of each unit relative to the canonical one
_LENGTH = {"um": 0, "nm": -3, "mm": 3}
_INV_LENGTH = {"um^-1": 0, "1/um": 0, "cm^-1": -4, "1/cm": -4}
_INV_AREA = {"um^-2": 0, "1/um^2": 0, "cm^-2": -8, "1/cm^2": -8}
_NONE = {"": 0}

# unit family per key; keys missing here are dimensionless
UNITS = {
    "layer_len": _LENGTH, "total_length": _LENGTH, "l0": _LENGTH, "zeta": _LENGTH,
    "lambda0": _LENGTH, "alpha": _INV_AREA, "dk0": _INV_LENGTH,
    "min": _INV_LENGTH, "max": _INV_LENGTH,
}


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        self.line = line
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


@dataclass
class _Entry:
    value: str
    line: int


@dataclass
class RunConfig:
    structure: Structure | None = None
    dispersion: DispersionParams | None = None
    grid: FrequencyGrid | None = None
    method: str = "closed_form"
    out: str | None = None
    format: str = "csv"
    sections: dict = field(default_factory=dict)
    source: str = "<config>"
    headers: dict = field(default_factory=dict)

    def _missing(self, section: str, key: str) -> ConfigError:
        return ConfigError(f"[{section}] missing required key {key!r}", self.headers.get(section), self.source)

    def entry(self, section: str, key: str) -> _Entry | None:
        return self.sections.get(section, {}).get(key)

    def number(self, section: str, key: str, default=None, integer=False):
        e = self.entry(section, key)
        if e is None:
            if default is None:
                raise self._missing(section, key)
            return default
        return _number(key, e, self.source, integer)

    def text(self, section: str, key: str, default: str | None = None) -> str:
        e = self.entry(section, key)
        if e is None:
            if default is None:
                raise self._missing(section, key)
            return default
        return e.value

    def numbers(self, section: str, key: str, unit_key: str | None = None) -> list[float]:
        """Comma-separated list; an optional unit after the last value applies to all."""
        e = self.entry(section, key)
        if e is None:
            raise self._missing(section, key)
        items = [s.strip() for s in e.value.split(",")]
        unit = ""
        last = items[-1].split()
        if len(last) == 2:
            items[-1], unit = last
        out = []
        for item in items:
            if not item:
                raise ConfigError(f"empty item in list {key!r}", e.line, self.source)
            out.append(_number(unit_key or key, _Entry(f"{item} {unit}".strip(), e.line), self.source))
        return out


def _number(key: str, e: _Entry, source: str, integer: bool = False):
    parts = e.value.split()
    if not 1 <= len(parts) <= 2:
        raise ConfigError(f"{key}: expected 'number [unit]', got {e.value!r}", e.line, source)
    family = UNITS.get(key, _NONE)
    unit = parts[1] if len(parts) == 2 else ""
    if unit not in family:
        if unit == "" and family is not _NONE:
            exp = 0  # bare numbers are canonical units
        else:
            allowed = ", ".join(u for u in family if u) or "none"
            raise ConfigError(f"{key}: unknown unit {unit!r} (allowed: {allowed})", e.line, source)
    else:
        exp = family[unit]
    try:
        v = int(parts[0]) if integer else float(parts[0])
    except ValueError:
        kind = "integer" if integer else "number"
        raise ConfigError(f"{key}: not a valid {kind}: {parts[0]!r}", e.line, source) from None
    if integer:
        if unit:
            raise ConfigError(f"{key}: integers take no unit", e.line, source)
        return v
    if not math.isfinite(v):
        raise ConfigError(f"{key}: must be finite", e.line, source)
    # powers of ten are exact, so this rounds once
    return v * 10.0 ** exp if exp >= 0 else v / 10.0 ** -exp


def _strip_comment(line: str) -> str:
    for mark in ("#", ";"):
        if line.lstrip().startswith(mark):
            return ""
        i = line.find(" " + mark)
        if i >= 0:
            line = line[:i]
    return line.strip()


def _tokenize(text: str, source: str, headers: dict) -> dict[str, dict[str, _Entry]]:
    sections: dict[str, dict[str, _Entry]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {line!r}", lineno, source)
            name = line[1:-1].strip()
            if name not in SECTIONS:
                raise ConfigError(f"unknown section [{name}] (known: {', '.join(SECTIONS)})", lineno, source)
            if name in sections:
                raise ConfigError(f"duplicate section [{name}]", lineno, source)
            current = sections[name] = {}
            headers[name] = lineno
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno, source)
        if current is None:
            raise ConfigError("key outside any section", lineno, source)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", lineno, source)
        if key in current:
            raise ConfigError(f"duplicate key {key!r}", lineno, source)
        current[key] = _Entry(value, lineno)
    return sections


_STRUCTURE_KEYS = {
    "photonic": {"kind", "n_layers", "layer_len", "total_length", "alpha", "chi0"},
    "aperiodic": {"kind", "n_layers", "l0", "zeta", "chi0"},
    "periodic": {"kind", "n_layers", "l0", "chi0"},
}
_KEYS = {
    "dispersion": {"lambda0", "B", "dk0"},
    "grid": {"min", "max", "n_points", "auto"},
    "output": {"path", "format", "method"},
    "sweep": {"parameter", "values", "objectives", "hold"},
    "optimize": {"n_layers", "total_length", "objective", "seeds", "n_coarse", "rtol"},
    "factor": {"n", "m", "threshold"},
}


def _check_keys(cfg: RunConfig, section: str, allowed: set[str]):
    for key, e in cfg.sections.get(section, {}).items():
        if key not in allowed:
            raise ConfigError(f"[{section}] unknown key {key!r} (allowed: {', '.join(sorted(allowed))})",
                              e.line, cfg.source)


def _line_of(cfg: RunConfig, section: str, key: str | None) -> int | None:
    if key is None:
        return None
    e = cfg.entry(section, key)
    return e.line if e else None


def _structure(cfg: RunConfig) -> Structure:
    kind = cfg.text("structure", "kind")
    if kind not in _STRUCTURE_KEYS:
        raise ConfigError(f"kind must be one of {', '.join(_STRUCTURE_KEYS)}, got {kind!r}",
                          _line_of(cfg, "structure", "kind"), cfg.source)
    _check_keys(cfg, "structure", _STRUCTURE_KEYS[kind])
    n = cfg.number("structure", "n_layers", integer=True)
    chi0 = cfg.number("structure", "chi0", 1.0)
    if kind == "photonic":
        alpha = cfg.number("structure", "alpha", 0.0)
        has_l, has_L = cfg.entry("structure", "layer_len"), cfg.entry("structure", "total_length")
        if bool(has_l) == bool(has_L):
            raise ConfigError("photonic structure needs exactly one of layer_len, total_length",
                              (has_l or has_L).line if (has_l or has_L) else None, cfg.source)
        if has_L:
            return PhotonicChirpSpec.from_total_length(n, cfg.number("structure", "total_length"), alpha, chi0)
        return PhotonicChirpSpec(n, cfg.number("structure", "layer_len"), alpha, chi0)
    l0 = cfg.number("structure", "l0")
    if kind == "periodic":
        return PeriodicPolingSpec(n, l0, chi0)
    return AperiodicPolingSpec(n, l0, cfg.number("structure", "zeta", 0.0), chi0)


def parse(text: str, source: str = "<config>") -> RunConfig:
    """Parse config text; raises ``ConfigError`` with a line number on any problem."""
    headers: dict[str, int] = {}
    cfg = RunConfig(sections=_tokenize(text, source, headers), source=source, headers=headers)
    for section, keys in _KEYS.items():
        _check_keys(cfg, section, keys)
    try:
        if "structure" in cfg.sections:
            cfg.structure = _structure(cfg)
        if "dispersion" in cfg.sections:
            cfg.dispersion = DispersionParams(cfg.number("dispersion", "lambda0"), cfg.number("dispersion", "B"),
                                              cfg.number("dispersion", "dk0", 0.0))
    except ValidationError as exc:
        section = "structure" if cfg.entry("structure", exc.field) else "dispersion"
        raise ConfigError(str(exc), _line_of(cfg, section, exc.field), source) from None
    if "grid" in cfg.sections and cfg.text("grid", "auto", "false").lower() not in ("true", "yes", "1"):
        try:
            cfg.grid = FrequencyGrid(cfg.number("grid", "min"), cfg.number("grid", "max"),
                                     cfg.number("grid", "n_points", integer=True))
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc), _line_of(cfg, "grid", "min"), source) from None
    method = cfg.text("output", "method", "closed")
    if method not in METHOD_NAMES:
        raise ConfigError(f"method must be one of {', '.join(METHOD_NAMES)}", _line_of(cfg, "output", "method"),
                          source)
    cfg.method = METHOD_NAMES[method]
    cfg.format = cfg.text("output", "format", "csv")
    if cfg.format not in FORMATS:
        raise ConfigError(f"format must be one of {', '.join(FORMATS)}", _line_of(cfg, "output", "format"), source)
    cfg.out = cfg.text("output", "path", "") or None
    return cfg


def load(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), source=path)


def _structure_lines(s: Structure) -> list[str]:
    if isinstance(s, PhotonicChirpSpec):
        return ["kind = photonic", f"n_layers = {s.n_layers}", f"layer_len = {s.layer_len!r} um",
                f"alpha = {s.alpha!r} um^-2", f"chi0 = {s.chi0!r}"]
    if isinstance(s, PeriodicPolingSpec):
        return ["kind = periodic", f"n_layers = {s.n_layers}", f"l0 = {s.l0!r} um", f"chi0 = {s.chi0!r}"]
    if isinstance(s, AperiodicPolingSpec):
        return ["kind = aperiodic", f"n_layers = {s.n_layers}", f"l0 = {s.l0!r} um", f"zeta = {s.zeta!r} um",
                f"chi0 = {s.chi0!r}"]
    raise TypeError(f"cannot write structure {type(s).__name__}")


def dump(cfg: RunConfig, comments: tuple[str, ...] = ()) -> str:
    """Canonical text for ``cfg`` (structure, dispersion, grid, output)."""
    out = [f"# {c}" for c in comments]
    if cfg.structure is not None:
        out += ["[structure]"] + _structure_lines(cfg.structure)
    if cfg.dispersion is not None:
        d = cfg.dispersion
        out += ["[dispersion]", f"lambda0 = {d.lambda0!r} um", f"B = {d.B!r}", f"dk0 = {d.dk0!r} um^-1"]
    if cfg.grid is not None:
        g = cfg.grid
        out += ["[grid]", f"min = {g.min!r} um^-1", f"max = {g.max!r} um^-1", f"n_points = {g.n_points}"]
    method = {v: k for k, v in METHOD_NAMES.items()}[cfg.method]
    out += ["[output]", f"method = {method}", f"format = {cfg.format}"]
    if cfg.out:
        out.append(f"path = {cfg.out}")
    return "\n".join(out) + "\n"
