"""Experiment configuration: INI-style key-value files with strict validation.

Every key has a documented default; unknown sections or keys are rejected so
that typos fail loudly.  The grammar is plain ``configparser`` INI: section
headers in brackets, ``key = value`` lines, UTF-8, ``#``/``;`` comments.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass

from .geometry import (
    Ball,
    FOURIER,
    Gaussian,
    Grid,
    Interval,
    MaskFamily,
    Quadric,
    SPACE,
    cat_head,
)
from .varying_masks import VaryingConfig


class ConfigError(ValueError):
    """Invalid, unknown or inconsistent configuration content."""


def _parse_floats(text: str) -> tuple:
    return tuple(float(tok) for tok in text.replace(",", " ").split())


# Schema: section -> key -> (parser, default).  ``omega`` shorthands accept
# multiples of 2*pi, e.g. "0.3*2pi".
def _parse_scaled(text: str) -> float:
    t = text.strip().lower().replace(" ", "")
    for suffix, factor in (("*2pi", 2 * math.pi), ("*pi", math.pi)):
        if t.endswith(suffix):
            return float(t[: -len(suffix)]) * factor
    return float(t)


_MASK_KEYS = {
    "shape": (str, "interval"),
    "center": (_parse_floats, (0.0,)),
    "half_width": (_parse_scaled, 1.0),
    "radius": (_parse_scaled, 1.0),
    "a": (_parse_floats, (1.0,)),
    "b": (float, 1.0),
    "gamma": (float, 50.0),
}

SCHEMA = {
    "grid": {
        "d": (int, 1),
        "N": (int, 150),
    },
    "space_mask": dict(_MASK_KEYS),
    "fourier_mask": dict(_MASK_KEYS),
    "solver": {
        "tol": (float, 1e-10),
        "max_applies": (int, 5000),
    },
    "varying": {
        "eps_min": (float, 0.1),
        "eps_max": (float, 100.0),
        "steps": (int, 250),
        "schedule": (str, "log"),
        "eta": (float, 1e-10),
        "n_vectors": (int, 16),
        "warm_start": (lambda s: s.lower() in ("1", "true", "yes"), True),
    },
    "outputs": {
        "n_plot_vectors": (int, 16),
        "spectrum_csv": (lambda s: s.lower() in ("1", "true", "yes"), True),
        "vectors_csv": (lambda s: s.lower() in ("1", "true", "yes"), True),
        "plots": (lambda s: s.lower() in ("1", "true", "yes"), True),
        "dump_matrix": (lambda s: s.lower() in ("1", "true", "yes"), False),
    },
    "limits": {
        "max_dense_dim": (int, 6000),
    },
    "oracle": {
        "suites": (str, "gaussian,splitting,quasimode,quadric,dpss,equivalence"),
        "gamma_space": (float, 50.0),
        "gamma_fourier": (float, 50.0),
        "gaussian_N": (int, 200),
        "quasimode_N": (int, 150),
        "quasimode_sigma": (float, 0.2),
    },
    "run": {
        "seed": (int, 0),
    },
}


@dataclass
class ExperimentConfig:
    """Validated configuration with concrete grid and mask families."""

    values: dict

    @property
    def grid(self) -> Grid:
        return Grid(self.values["grid"]["d"], self.values["grid"]["N"])

    def _mask(self, section: str, role: str) -> MaskFamily:
        sec = self.values[section]
        shape = sec["shape"].lower()
        d = self.values["grid"]["d"]
        center = sec["center"]
        if len(center) == 1 and d > 1:
            center = tuple(center) * d
        if shape == "interval":
            if d != 1:
                raise ConfigError("interval masks are one-dimensional")
            spec = Interval(center[0], sec["half_width"])
        elif shape == "ball":
            spec = Ball(tuple(center), sec["radius"])
        elif shape == "quadric":
            a = sec["a"]
            if len(a) == 1 and d > 1:
                a = tuple(a) * d
            spec = Quadric(tuple(center), tuple(a), sec["b"])
        elif shape == "gaussian":
            spec = Gaussian(sec["gamma"])
        elif shape in ("cat-head", "cat_head", "cathead"):
            if d != 2:
                raise ConfigError("the cat-head shape is two-dimensional")
            spec = cat_head()
        else:
            raise ConfigError(f"unknown mask shape {sec['shape']!r} in [{section}]")
        return MaskFamily(spec, role)

    @property
    def space_family(self) -> MaskFamily:
        return self._mask("space_mask", SPACE)

    @property
    def fourier_family(self) -> MaskFamily:
        return self._mask("fourier_mask", FOURIER)

    @property
    def varying(self) -> VaryingConfig:
        v = self.values["varying"]
        s = self.values["solver"]
        if v["n_vectors"] > self.grid.size:
            raise ConfigError("n_vectors exceeds the number of degrees of freedom")
        return VaryingConfig(
            eps_min=v["eps_min"], eps_max=v["eps_max"], steps=v["steps"],
            schedule=v["schedule"], eta=v["eta"], n_vectors=v["n_vectors"],
            solver_tol=s["tol"], max_applies=s["max_applies"],
            warm_start=v["warm_start"],
        )

    def oracle_suites(self) -> list[str]:
        return [s.strip() for s in self.values["oracle"]["suites"].split(",") if s.strip()]


def default_config() -> ExperimentConfig:
    values = {sec: {k: spec[1] for k, spec in keys.items()} for sec, keys in SCHEMA.items()}
    return ExperimentConfig(values=values)


def load_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keys are case-sensitive (N vs n)
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    cfg = default_config()
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            parse = SCHEMA[section][key][0]
            try:
                cfg.values[section][key] = parse(raw)
            except (TypeError, ValueError) as err:
                raise ConfigError(f"bad value for {key!r} in [{section}]: {raw!r} ({err})")
    try:
        cfg.grid
        cfg.space_family
        cfg.fourier_family
        cfg.varying
    except (ConfigError, ValueError) as err:
        raise ConfigError(str(err))
    return cfg
