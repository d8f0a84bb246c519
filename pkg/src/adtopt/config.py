"""JSON scenario files.

A scenario file names the model family, the nominal parameters, the
measurement times and optional optimizer, sweep and simulation settings::

    {
      "family": "gamma+lmem",
      "x_u": -0.4,
      "alpha": 0.5,
      "times": [0.25, 0.5, 0.75, 1.0],
      "gamma1": {"beta0": 0.23, "beta1": 0.53, "nu": 1.0, "z0": 5.16},
      "lmem": {"beta20": 2.35, "beta21": 0.06, "beta22": 0.28, "beta23": 0.04,
               "sigma0": 0.08, "sigma_eps": 0.09, "y20": 3.73},
      "optimizer": {"grid_step": 0.01, "tol": 1e-6, "max_iter": 20000}
    }

``sigma0`` and ``sigma_eps`` are standard deviations.  Unknown keys are
rejected.
"""
import json
import math
import re
import warnings
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

from .design import Design
from .failure_time import Scenario
from .gamma_model import GammaComponentParams, MeasurementSchedule
from .lmem_model import LmemComponentParams


class ConfigError(ValueError):
    pass


_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_GAMMA = {
    "type": "object",
    "properties": {"beta0": _NUM, "beta1": _NUM, "nu": _POS, "z0": _POS},
    "required": ["beta0", "beta1", "nu", "z0"],
    "additionalProperties": False,
}
_LMEM = {
    "type": "object",
    "properties": {
        "beta20": _NUM, "beta21": _NUM, "beta22": _NUM, "beta23": _NUM,
        "sigma0": _POS, "sigma_eps": _POS, "y20": _NUM,
    },
    "required": ["beta20", "beta21", "beta22", "beta23", "sigma0", "sigma_eps", "y20"],
    "additionalProperties": False,
}
_DESIGN = {
    "type": "object",
    "properties": {
        "points": {"type": "array", "items": _NUM, "minItems": 1},
        "weights": {"type": "array", "items": _POS, "minItems": 1},
    },
    "required": ["points", "weights"],
    "additionalProperties": False,
}
_DESIGN_REF = {"oneOf": [{"enum": ["optimal", "uniform2", "uniform3"]}, _DESIGN]}
_METHOD = {"enum": ["multiplicative", "two-point"]}

SCHEMA = {
    "type": "object",
    "properties": {
        "family": {"enum": ["gamma", "gamma+gamma", "gamma+lmem"]},
        "x_u": _NUM,
        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "times": {"type": "array", "items": _POS, "minItems": 1},
        "gamma1": _GAMMA,
        "gamma2": _GAMMA,
        "lmem": _LMEM,
        "description": {"type": "string"},
        "optimizer": {
            "type": "object",
            "properties": {
                "grid_step": _POS,
                "tol": _POS,
                "max_iter": {"type": "integer", "minimum": 1},
                "method": _METHOD,
                "weight_step": _POS,
            },
            "additionalProperties": False,
        },
        "sweep": {
            "type": "object",
            "properties": {
                "param": {"type": "string"},
                "from": _NUM,
                "to": _NUM,
                "step": _POS,
                "method": _METHOD,
                "compare": {"type": "object", "additionalProperties": {
                    "oneOf": [{"enum": ["nominal", "uniform2", "uniform3"]}, _DESIGN]}},
            },
            "additionalProperties": False,
        },
        "simulation": {
            "type": "object",
            "properties": {
                "n_units": {"type": "integer", "minimum": 4},
                "replications": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "designs": {"type": "array", "items": _DESIGN_REF, "minItems": 1},
            },
            "additionalProperties": False,
        },
        "fixed_design": _DESIGN,
    },
    "required": ["family", "x_u", "times", "gamma1"],
    "additionalProperties": False,
}
_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


@dataclass(frozen=True)
class OptimizerSettings:
    grid_step: float = 0.01
    tol: float = 1e-6
    max_iter: int = 20_000
    method: str = "multiplicative"
    weight_step: float = 0.01


@dataclass(frozen=True)
class ScenarioFile:
    scenario: Scenario
    optimizer: OptimizerSettings = OptimizerSettings()
    sweep: dict = field(default_factory=dict)
    simulation: dict = field(default_factory=dict)
    fixed_design: object = None
    source: str = "<config>"


def _line_of(text, path):
    """Best-effort line number of the JSON element at ``path`` in ``text``."""
    pos = 0
    for key in path:
        if isinstance(key, str):
            m = re.compile(r'"%s"\s*:' % re.escape(key)).search(text, pos)
            if m is None:
                break
            pos = m.start()
    return text.count("\n", 0, pos) + 1


def _design_from(obj):
    if isinstance(obj, str):
        return obj
    return Design.merged(obj["points"], obj["weights"])


def parse_config(text, source="<config>"):
    """Parse and validate scenario JSON text; raises ConfigError."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    errors = sorted(_VALIDATOR.iter_errors(raw),
                    key=lambda e: (e.validator == "required", -len(e.absolute_path), e.message))
    if errors:
        exc = errors[0]
        path = list(exc.absolute_path)
        if exc.validator == "additionalProperties" and isinstance(exc.instance, dict):
            allowed = set(exc.schema.get("properties", {}))
            extra = [k for k in exc.instance if k not in allowed]
            path = path + extra[:1]
        where = "/".join(str(p) for p in path) or "<root>"
        line = _line_of(text, path)
        more = f" (and {len(errors) - 1} more)" if len(errors) > 1 else ""
        raise ConfigError(f"{source}:{line}: {where}: {exc.message}{more}")

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            schedule = MeasurementSchedule(tuple(raw["times"]))
        g1 = GammaComponentParams(**raw["gamma1"])
        g2 = GammaComponentParams(**raw["gamma2"]) if "gamma2" in raw else None
        lm = None
        if "lmem" in raw:
            p = dict(raw["lmem"])
            lm = LmemComponentParams(
                p["beta20"], p["beta21"], p["beta22"], p["beta23"],
                p["sigma0"] ** 2, p["sigma_eps"] ** 2, p["y20"],
            )
        scenario = Scenario(raw["family"], g1, schedule, raw["x_u"], raw.get("alpha", 0.5),
                            gamma2=g2, lmem=lm)
        fixed = _design_from(raw["fixed_design"]) if "fixed_design" in raw else None
    except ValueError as exc:
        raise ConfigError(f"{source}:1: {exc}") from None

    sweep = dict(raw.get("sweep", {}))
    if "compare" in sweep:
        sweep["compare"] = {k: _design_from(v) for k, v in sweep["compare"].items()}
    sim = dict(raw.get("simulation", {}))
    if "designs" in sim:
        sim["designs"] = [_design_from(d) for d in sim["designs"]]
    return ScenarioFile(scenario, OptimizerSettings(**raw.get("optimizer", {})), sweep, sim,
                        fixed, source)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    return parse_config(text, str(path))


def bundled_config_path(name):
    """Path of a bundled example config: 'univariate', 'gamma_gamma' or 'gamma_lmem'."""
    ref = resources.files("adtopt") / "configs" / f"{name}.json"
    if not ref.is_file():
        raise ConfigError(f"no bundled config named {name!r}")
    return str(ref)


def scenario_to_dict(scenario):
    """Inverse of the scenario part of :func:`parse_config`."""
    out = {
        "family": scenario.family.value,
        "x_u": scenario.x_u,
        "alpha": scenario.alpha,
        "times": list(scenario.schedule.times),
        "gamma1": _gamma_dict(scenario.gamma1),
    }
    if scenario.gamma2 is not None:
        out["gamma2"] = _gamma_dict(scenario.gamma2)
    if scenario.lmem is not None:
        p = scenario.lmem
        out["lmem"] = {
            "beta20": p.beta20, "beta21": p.beta21, "beta22": p.beta22, "beta23": p.beta23,
            "sigma0": math.sqrt(p.sigma0_sq), "sigma_eps": math.sqrt(p.sigma_eps_sq),
            "y20": p.y20,
        }
    return out


def _gamma_dict(p):
    return {"beta0": p.beta0, "beta1": p.beta1, "nu": p.nu, "z0": p.z0}
