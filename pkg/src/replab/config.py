"""Run configuration: one JSON document, schema-validated before any compute.

Sweeps fan a single document out over parameter lists, so validation has
to fail fast and completely up front.  The schema below is the external
contract for the CLI; the dataclasses add the numeric invariants the
schema cannot express (they re-raise as :class:`ConfigError`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import jsonschema

from .evolution import SimConfig, TERMINAL_REGIMES
from .grid import Grid, build_grid
from .initdata import ProfileSpec


class ConfigError(ValueError):
    """The configuration document is invalid."""


_BOUNDS_PAIR = {
    "type": "array", "items": {"type": "number"},
    "minItems": 2, "maxItems": 2,
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["domain"],
    "properties": {
        "domain": {
            "type": "object",
            "additionalProperties": False,
            "required": ["dim", "bounds", "n"],
            "properties": {
                "dim": {"enum": [1, 2]},
                "bounds": {"type": "array", "items": _BOUNDS_PAIR,
                           "minItems": 1, "maxItems": 2},
                "n": {"type": "array", "items": {"type": "integer", "minimum": 3},
                      "minItems": 1, "maxItems": 2},
            },
        },
        "profile": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["torsion_scaled", "sine_bump",
                                  "plateau_bump", "custom_samples"]},
                "target_mass": {"type": "number", "exclusiveMinimum": 0},
                "params": {"type": "object"},
            },
        },
        "sim": {
            "type": "object",
            "additionalProperties": False,
            "required": ["eps", "t_end"],
            "properties": {
                "eps": {"type": "number", "exclusiveMinimum": 0},
                "t_end": {"type": "number", "exclusiveMinimum": 0},
                "cfl_sigma": {"type": "number"},
                "source_sigma": {"type": "number"},
                "blowup_threshold": {"type": "number"},
                "decay_threshold": {"type": "number"},
                "settle_tol": {"type": "number"},
                "record_every": {"type": "integer", "minimum": 1},
            },
        },
        "torsion_tol": {"type": "number", "exclusiveMinimum": 0},
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "series_path": {"type": "string"},
                "report_path": {"type": "string"},
            },
        },
        "checks": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "energy_slack_per_step": {"type": ["number", "null"]},
                "mass_slack_per_step": {"type": ["number", "null"]},
                "mass_ode_coeff": {"type": ["number", "null"]},
                "expected_regime": {"enum": list(TERMINAL_REGIMES) + [None]},
            },
        },
        "minimize": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "init": {"type": ["object", "null"]},
                "step": {"type": ["number", "null"]},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "max_iter": {"type": "integer", "minimum": 1},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["masses", "eps", "n"],
            "properties": {
                "masses": {"type": "array", "items": {"type": "number"}},
                "eps": {"type": "array", "items": {"type": "number"}},
                "n": {"type": "array",
                      "items": {"type": "array",
                                "items": {"type": "integer", "minimum": 3},
                                "minItems": 1, "maxItems": 2}},
            },
        },
        "seed": {"type": "integer"},
    },
}


@dataclass(frozen=True)
class ChecksConfig:
    """Which report checks gate the exit code; None disables a check."""

    energy_slack_per_step: float | None = 1e-8
    mass_slack_per_step: float | None = 1e-10
    mass_ode_coeff: float | None = None
    expected_regime: str | None = None


@dataclass(frozen=True)
class MinimizeConfig:
    init: ProfileSpec | None = None  # None: uniform unit-mass start
    step: float | None = None
    tol: float = 1e-9
    max_iter: int = 200_000


@dataclass(frozen=True)
class SweepConfig:
    masses: tuple[float, ...]
    eps: tuple[float, ...]
    n: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class OutputsConfig:
    series_path: str = "series.csv"
    report_path: str = "report.json"


@dataclass(frozen=True)
class RunConfig:
    """Validated run document.

    ``seed`` exists for randomized property-test profiles only; the
    simulations themselves are deterministic and never consume it.
    """

    domain_dim: int
    domain_bounds: tuple[tuple[float, float], ...]
    domain_n: tuple[int, ...]
    profile: ProfileSpec | None
    sim: SimConfig | None
    outputs: OutputsConfig = field(default_factory=OutputsConfig)
    checks: ChecksConfig = field(default_factory=ChecksConfig)
    minimize: MinimizeConfig = field(default_factory=MinimizeConfig)
    sweep: SweepConfig | None = None
    torsion_tol: float = 1e-10
    seed: int = 0

    def build_grid(self) -> Grid:
        return build_grid(self.domain_dim, self.domain_bounds, self.domain_n)


def _profile_from_dict(doc: dict) -> ProfileSpec:
    return ProfileSpec(kind=doc["kind"],
                       target_mass=float(doc.get("target_mass", 1.0)),
                       params=dict(doc.get("params", {})))


def parse_config(doc: dict) -> RunConfig:
    """Validate a configuration document and build the typed config."""
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {path}: {exc.message}") from exc

    try:
        dom = doc["domain"]
        bounds = tuple(tuple(map(float, pair)) for pair in dom["bounds"])
        n = tuple(int(k) for k in dom["n"])
        build_grid(dom["dim"], bounds, n)  # fail fast on bad geometry

        profile = None
        if "profile" in doc:
            profile = _profile_from_dict(doc["profile"])

        sim = None
        if "sim" in doc:
            sim = SimConfig(**doc["sim"])

        checks = ChecksConfig(**doc.get("checks", {}))
        if checks.expected_regime is not None \
                and checks.expected_regime not in TERMINAL_REGIMES:
            raise ValueError(f"unknown expected_regime {checks.expected_regime!r}")

        mm = dict(doc.get("minimize", {}))
        if mm.get("init") is not None:
            mm["init"] = _profile_from_dict(mm["init"])
        minimize = MinimizeConfig(**mm)

        sweep = None
        if "sweep" in doc:
            sw = doc["sweep"]
            if not (sw["masses"] and sw["eps"] and sw["n"]):
                raise ValueError("sweep lists must be non-empty")
            sweep = SweepConfig(masses=tuple(map(float, sw["masses"])),
                                eps=tuple(map(float, sw["eps"])),
                                n=tuple(tuple(int(k) for k in item)
                                        for item in sw["n"]))

        outputs = OutputsConfig(**doc.get("outputs", {}))
        return RunConfig(
            domain_dim=int(dom["dim"]),
            domain_bounds=bounds,
            domain_n=n,
            profile=profile,
            sim=sim,
            outputs=outputs,
            checks=checks,
            minimize=minimize,
            sweep=sweep,
            torsion_tol=float(doc.get("torsion_tol", 1e-10)),
            seed=int(doc.get("seed", 0)),
        )
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    return parse_config(doc)
