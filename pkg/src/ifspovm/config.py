"""Experiment configuration: TOML in, validated and fully defaulted dict out."""
from __future__ import annotations

import copy
import hashlib
import json
import sys
from fractions import Fraction

from .errors import DomainError
from .geometry import AffineContraction, IFSystem

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib


class ConfigError(DomainError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


DEFAULTS = {
    "ifs": {"maps": None, "dimension": None},
    "attractor": {"tol": 1e-6, "max_iter": 64, "dedup_tolerance": 0.0},
    "measure": {"depth": 6, "merge_radius": 0.0},
    "povm": {"cells": 27, "tol": 1e-10, "max_iter": 500, "dictionary_size": 54, "seed": 0},
    "completion": {"n_max": 12, "truncations": 10},
}

# field -> (kind, strictly positive)
SCHEMA = {
    "attractor": {"tol": ("real", True), "max_iter": ("int", True), "dedup_tolerance": ("real", False)},
    "measure": {"depth": ("int", True), "merge_radius": ("real", False)},
    "povm": {
        "cells": ("int", True),
        "tol": ("real", True),
        "max_iter": ("int", True),
        "dictionary_size": ("int", True),
        "seed": ("int", False),
    },
    "completion": {"n_max": ("int", True), "truncations": ("int", True)},
}


def parse_real(value, path):
    """Accept ints, floats and strings such as '2/3' or '1e-8'."""
    if isinstance(value, bool):
        raise ConfigError(path, "expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            raise ConfigError(path, f"cannot read {value!r} as a number") from None
    raise ConfigError(path, f"expected a number, got {type(value).__name__}")


def _parse_int(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    return value


def _parse_maps(maps, path="ifs.maps"):
    if not isinstance(maps, list) or len(maps) < 2:
        raise ConfigError(path, "need a list of at least two maps")
    out = []
    for k, m in enumerate(maps):
        p = f"{path}[{k}]"
        if not isinstance(m, dict):
            raise ConfigError(p, "each map is a table with slope/matrix and offset")
        unknown = set(m) - {"slope", "matrix", "offset"}
        if unknown:
            raise ConfigError(f"{p}.{sorted(unknown)[0]}", "unknown field")
        if "offset" not in m:
            raise ConfigError(f"{p}.offset", "missing")
        if ("slope" in m) == ("matrix" in m):
            raise ConfigError(p, "give exactly one of slope or matrix")
        if "slope" in m:
            lin = [[parse_real(m["slope"], f"{p}.slope")]]
            off = [parse_real(m["offset"], f"{p}.offset")]
        else:
            rows = m["matrix"]
            if not isinstance(rows, list) or not rows:
                raise ConfigError(f"{p}.matrix", "expected a list of rows")
            lin = [[parse_real(v, f"{p}.matrix[{r}][{c}]") for c, v in enumerate(row)] for r, row in enumerate(rows)]
            offs = m["offset"] if isinstance(m["offset"], list) else [m["offset"]]
            off = [parse_real(v, f"{p}.offset[{c}]") for c, v in enumerate(offs)]
        out.append({"linear": lin, "offset": off})
    return out


def validate(raw: dict) -> dict:
    """Return the fully defaulted, canonical config or raise ConfigError."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a table")
    unknown = set(raw) - set(DEFAULTS)
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown section")
    cfg = copy.deepcopy(DEFAULTS)
    for section, fields in SCHEMA.items():
        given = raw.get(section, {})
        if not isinstance(given, dict):
            raise ConfigError(section, "expected a table")
        for key in given:
            if key not in fields:
                raise ConfigError(f"{section}.{key}", "unknown field")
        for key, (kind, positive) in fields.items():
            if key not in given:
                continue
            path = f"{section}.{key}"
            val = parse_real(given[key], path) if kind == "real" else _parse_int(given[key], path)
            if positive and not val > 0:
                raise ConfigError(path, "must be positive")
            if not positive and val < 0:
                raise ConfigError(path, "must be nonnegative")
            cfg[section][key] = val
    ifs = raw.get("ifs")
    if ifs is not None:
        if not isinstance(ifs, dict):
            raise ConfigError("ifs", "expected a table")
        for key in ifs:
            if key not in ("maps", "dimension"):
                raise ConfigError(f"ifs.{key}", "unknown field")
        maps = _parse_maps(ifs.get("maps"))
        dims = {len(m["linear"]) for m in maps}
        if len(dims) != 1:
            raise ConfigError("ifs.maps", "maps of mixed dimension")
        dim = dims.pop()
        if "dimension" in ifs and ifs["dimension"] != dim:
            raise ConfigError("ifs.dimension", f"declared {ifs['dimension']!r} but maps act on dimension {dim}")
        if dim not in (1, 2):
            raise ConfigError("ifs.dimension", "only dimensions 1 and 2 are supported")
        for k, m in enumerate(maps):
            try:
                AffineContraction(m["linear"], m["offset"])
            except DomainError as exc:
                field = "slope" if "slope" in ifs["maps"][k] else "matrix"
                raise ConfigError(f"ifs.maps[{k}].{field}", str(exc)) from None
        cfg["ifs"] = {"maps": maps, "dimension": dim}
    if cfg["povm"]["dictionary_size"] < cfg["povm"]["cells"]:
        raise ConfigError("povm.dictionary_size", "must be at least povm.cells")
    return cfg


def load(path) -> dict:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(path), f"not valid TOML ({exc})") from None
    return validate(raw)


def build_ifs(cfg) -> IFSystem:
    maps = cfg["ifs"]["maps"]
    if maps is None:
        raise ConfigError("ifs.maps", "this command needs an IFS")
    return IFSystem([AffineContraction(m["linear"], m["offset"]) for m in maps])


def config_hash(cfg) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
