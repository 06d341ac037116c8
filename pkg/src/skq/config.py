"""Strict JSON experiment configuration."""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .qkick import KickParams, Reduction, ReductionKind
from .torus import MapKind, MapSpec


class Experiment(enum.Enum):
    QuasienergySpectrum = "QuasienergySpectrum"
    QuasienergyField = "QuasienergyField"
    SKModeField = "SKModeField"
    EnsembleDynamics = "EnsembleDynamics"
    PhaseDecomposition = "PhaseDecomposition"
    CorrelationScan = "CorrelationScan"


DESCRIPTIONS = {
    Experiment.QuasienergySpectrum: "fundamental quasienergies chi_up/chi_down over the grid",
    Experiment.QuasienergyField: "occupation of the continued quasienergy state over the grid",
    Experiment.SKModeField: "occupation of the SK mode V(theta)|anchor> over the grid",
    Experiment.EnsembleDynamics: "population, coherence and entropy of a driven spin ensemble",
    Experiment.PhaseDecomposition: "dynamical and geometric phase averages along one orbit",
    Experiment.CorrelationScan: "autocorrelation of exp(i theta1) against the lag",
}

COUNT_DEFAULTS = {"N_ensemble": 40_000, "N_average": 10_000, "steps": 30, "grid": 128}

TOP_KEYS = {
    "experiment",
    "map",
    "K",
    "omega_ratio",
    "reduction",
    "reduction_value",
    "N_ensemble",
    "N_average",
    "steps",
    "grid",
    "seed",
    "initial_condition",
    "output_dir",
    "branch",
    "anchor",
    "cycle_length",
    "theta0",
    "samples",
}
IC_KEYS = {"spatial", "center", "side", "spin", "psi"}


@dataclass(frozen=True)
class InitialConditionSpec:
    spatial: str = "UniformTorus"
    center: tuple = (1.0, 2.0)
    side: float = 1e-3
    spin: str = "FixedState"
    psi: tuple = (complex(1 / math.sqrt(2)), complex(1 / math.sqrt(2)))


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: Experiment
    map: MapSpec
    kick: KickParams
    seed: int
    N_ensemble: int = 40_000
    N_average: int = 10_000
    steps: int = 30
    grid: int = 128
    initial_condition: InitialConditionSpec = field(default_factory=InitialConditionSpec)
    output_dir: str = "."
    branch: str = "Up"
    anchor: tuple = (0.0, 0.0)
    cycle_length: int = 1
    theta0: tuple = (1.0, 2.0)
    samples: int = 100_000
    sha256: str = ""


def _number(raw, name):
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ValidationError(name, "expected a number")
    if not math.isfinite(raw):
        raise ValidationError(name, "must be finite")
    return float(raw)


def _count(raw, name):
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ValidationError(name, "expected an integer")
    if raw < 1:
        raise ValidationError(name, "must be >= 1")
    return raw


def _point(raw, name):
    if not isinstance(raw, list) or len(raw) != 2:
        raise ValidationError(name, "expected [theta1, theta2]")
    return tuple(_number(x, name) for x in raw)


def _spinor(raw, name):
    """[a, b] with real entries or [re, im] pairs."""
    if not isinstance(raw, list) or len(raw) != 2:
        raise ValidationError(name, "expected two components")
    out = []
    for c in raw:
        if isinstance(c, list):
            if len(c) != 2:
                raise ValidationError(name, "complex components are [re, im]")
            out.append(complex(_number(c[0], name), _number(c[1], name)))
        else:
            out.append(complex(_number(c, name)))
    if abs(out[0]) ** 2 + abs(out[1]) ** 2 == 0:
        raise ValidationError(name, "spin state must be nonzero")
    return tuple(out)


def _enum(cls, raw, name):
    try:
        return cls(raw)
    except ValueError:
        choices = ", ".join(m.value for m in cls)
        raise ValidationError(name, f"expected one of {choices}") from None


def _initial_condition(raw):
    if not isinstance(raw, dict):
        raise ValidationError("initial_condition", "expected an object")
    unknown = set(raw) - IC_KEYS
    if unknown:
        raise ValidationError(f"initial_condition.{sorted(unknown)[0]}", "unknown key")
    spatial = raw.get("spatial", "UniformTorus")
    if spatial not in ("UniformSquare", "UniformTorus", "FieldWeighted"):
        raise ValidationError("initial_condition.spatial", f"unknown spatial law {spatial!r}")
    spin = raw.get("spin", "FixedState")
    if spin not in ("FixedState", "FromField"):
        raise ValidationError("initial_condition.spin", f"unknown spin law {spin!r}")
    ic = InitialConditionSpec(spatial=spatial, spin=spin)
    kw = {}
    if "center" in raw:
        kw["center"] = _point(raw["center"], "initial_condition.center")
    if "side" in raw:
        side = _number(raw["side"], "initial_condition.side")
        if side <= 0:
            raise ValidationError("initial_condition.side", "must be > 0")
        kw["side"] = side
    if "psi" in raw:
        kw["psi"] = _spinor(raw["psi"], "initial_condition.psi")
    return InitialConditionSpec(**{**ic.__dict__, **kw})


def parse_config(text: str) -> ExperimentConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    if not isinstance(raw, dict):
        raise ParseError("top level must be a JSON object", line=1)
    unknown = sorted(set(raw) - TOP_KEYS)
    if unknown:
        raise ValidationError(unknown[0], "unknown key")
    if "experiment" not in raw:
        raise ValidationError("experiment", "missing")
    experiment = _enum(Experiment, raw["experiment"], "experiment")
    if "map" not in raw:
        raise ValidationError("map", "missing")
    kind = _enum(MapKind, raw["map"], "map")
    if kind is MapKind.Standard:
        if "K" not in raw:
            raise ValidationError("K", "required for the standard map")
        K = _number(raw["K"], "K")
        if K < 0:
            raise ValidationError("K", "must be >= 0")
        spec = MapSpec.standard(K)
    else:
        if "K" in raw:
            raise ValidationError("K", "only meaningful for the standard map")
        spec = MapSpec(kind)
    if "seed" not in raw:
        raise ValidationError("seed", "missing; runs never draw entropy from the environment")
    seed = raw["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ValidationError("seed", "expected a non-negative integer")

    omega = _number(raw.get("omega_ratio", 2.5), "omega_ratio")
    if omega <= 0:
        raise ValidationError("omega_ratio", "must be > 0")
    red_kind = _enum(ReductionKind, raw.get("reduction", "FixTheta3"), "reduction")
    default_value = np.pi / 4 if red_kind is ReductionKind.FixTheta3 else 0.0
    red_value = _number(raw.get("reduction_value", default_value), "reduction_value")
    if red_kind is ReductionKind.Full3D:
        raise ValidationError("reduction", "torus maps act on two angles; use FixTheta3 or FixTheta2")
    kick = KickParams(omega, Reduction(red_kind, red_value))

    counts = {k: _count(raw.get(k, v), k) for k, v in COUNT_DEFAULTS.items()}
    extra = {}
    if "initial_condition" in raw:
        extra["initial_condition"] = _initial_condition(raw["initial_condition"])
    if "output_dir" in raw:
        if not isinstance(raw["output_dir"], str):
            raise ValidationError("output_dir", "expected a path string")
        extra["output_dir"] = raw["output_dir"]
    if "branch" in raw:
        if raw["branch"] not in ("Up", "Down"):
            raise ValidationError("branch", "expected Up or Down")
        extra["branch"] = raw["branch"]
    for key in ("anchor", "theta0"):
        if key in raw:
            extra[key] = _point(raw[key], key)
    for key in ("cycle_length", "samples"):
        if key in raw:
            extra[key] = _count(raw[key], key)
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return ExperimentConfig(
        experiment=experiment, map=spec, kick=kick, seed=seed, sha256=digest, **counts, **extra
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not UTF-8: {exc.reason}", line=None) from None
    return parse_config(text)
