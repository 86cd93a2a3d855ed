"""Scenario files: YAML parsing, validation, presets and the config echo.

A scenario file looks like::

    name: sim-known-field
    variant: gekf            # gekf | baseline | lbs-reference
    seed: 0
    horizon: 100.0
    initial_position: [2.0, 2.0]
    initial_washout: null    # default f(x0, y0) / h
    field:
      kind: quadratic        # quadratic | gaussian | custom-polynomial
      peak: 10.0
      curvature: [1.0, 3.0]  # quadratic only; gaussian uses widths
      center: [1.0, 1.0]     # or schedule: [[t, x, y], ...]
    noise: {sigma: 0.0}
    esc: {omega: 120, c: 0.3, Omega: 3, lambda: 0.0105, h: 1, a0: 1, epsilon: 0.01}
    gekf: {dt: 0.01, n_substeps: 10, Q: 0.0005, R: 0.00999, P0: 4.0}
    integrator: {min_substeps: 1, steps_per_period: 40}

Every key is checked; unknown keys are rejected with the dotted path of
the offending key.
"""

from __future__ import annotations

import math
from importlib import resources
from pathlib import Path

import yaml

from .controller import EscParams
from .errors import ConfigError
from .field import FieldModel, NoiseModel, SourceSchedule
from .sim import ScenarioConfig

PRESET_PACKAGE = "unicycle_esc.presets"

_TOP = {"name", "variant", "seed", "horizon", "initial_position", "initial_washout",
        "field", "noise", "esc", "gekf", "integrator"}
_FIELD = {"kind", "peak", "center", "schedule", "curvature", "widths", "terms"}
_NOISE = {"sigma"}
_ESC = {"omega": "omega", "c": "c", "Omega": "Omega", "lambda": "lam", "h": "h", "a0": "a0", "epsilon": "epsilon"}
_GEKF = {"dt": "dt_meas", "n_substeps": "n_substeps", "Q": "q_scale", "R": "r_scale", "P0": "p0",
         "singular_guard": "singular_guard", "pairing": "pairing", "anchor": "anchor",
         "covariance_step": "covariance_step"}
_INTEGRATOR = {"min_substeps", "steps_per_period"}
_REQUIRED_ESC = ("omega", "c", "Omega", "lambda", "h", "a0")


def preset_names() -> list[str]:
    files = resources.files(PRESET_PACKAGE).iterdir()
    return sorted(f.name[:-5] for f in files if f.name.endswith(".yaml"))


def preset_text(name: str) -> str:
    if name not in preset_names():
        raise ConfigError(f"unknown scenario {name!r}; available presets: {', '.join(preset_names())}")
    return resources.files(PRESET_PACKAGE).joinpath(f"{name}.yaml").read_text()


def _section(raw, path: str, allowed) -> dict:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a mapping")
    unknown = sorted(set(raw) - set(allowed))
    if unknown:
        prefix = f"{path}." if path else ""
        raise ConfigError(f"unknown key {prefix}{unknown[0]}; allowed: {', '.join(sorted(allowed))}")
    return raw


def _number(raw, key: str, *, integer: bool = False):
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {raw!r}")
    if integer:
        if int(raw) != raw:
            raise ConfigError(f"{key}: expected an integer, got {raw!r}")
        return int(raw)
    value = float(raw)
    if not math.isfinite(value):
        raise ConfigError(f"{key}: must be finite")
    return value


def _pair(raw, key: str) -> tuple[float, float]:
    if not isinstance(raw, (list, tuple)) or len(raw) != 2:
        raise ConfigError(f"{key}: expected a list of two numbers")
    return _number(raw[0], key), _number(raw[1], key)


def _field(raw) -> FieldModel:
    sec = _section(raw, "field", _FIELD)
    if "kind" not in sec:
        raise ConfigError("field.kind is required")
    kind = sec["kind"]
    if "center" in sec and "schedule" in sec:
        raise ConfigError("field.center and field.schedule are mutually exclusive")
    if "schedule" in sec:
        wps = sec["schedule"]
        if not isinstance(wps, list) or not all(isinstance(w, (list, tuple)) and len(w) == 3 for w in wps):
            raise ConfigError("field.schedule: expected a list of [t, x, y] entries")
        schedule_data = tuple((_number(t, "field.schedule"), (_number(x, "field.schedule"), _number(y, "field.schedule"))) for t, x, y in wps)
    elif "center" in sec:
        schedule_data = ((0.0, _pair(sec["center"], "field.center")),)
    else:
        raise ConfigError("field.center or field.schedule is required")
    if kind == "quadratic":
        shape = _pair(sec.get("curvature", [1.0, 1.0]), "field.curvature")
    elif kind == "gaussian":
        shape = _pair(sec.get("widths", [1.0, 1.0]), "field.widths")
    else:
        shape = (1.0, 1.0)
    terms = ()
    if "terms" in sec:
        if not isinstance(sec["terms"], list) or not all(isinstance(t, (list, tuple)) and len(t) == 3 for t in sec["terms"]):
            raise ConfigError("field.terms: expected a list of [i, j, coefficient] entries")
        terms = tuple((_number(i, "field.terms", integer=True), _number(j, "field.terms", integer=True), _number(c, "field.terms")) for i, j, c in sec["terms"])
    try:
        return FieldModel(kind, _number(sec.get("peak", 0.0), "field.peak"), SourceSchedule(schedule_data), shape, terms)
    except ValueError as exc:
        raise ConfigError(f"field: {exc}") from exc


def _params(esc_raw, gekf_raw) -> EscParams:
    esc = _section(esc_raw, "esc", _ESC)
    gekf = _section(gekf_raw, "gekf", _GEKF)
    missing = [k for k in _REQUIRED_ESC if k not in esc]
    if missing:
        raise ConfigError(f"esc.{missing[0]} is required")
    kwargs = {_ESC[k]: _number(v, f"esc.{k}") for k, v in esc.items()}
    for k, v in gekf.items():
        if k in ("pairing", "covariance_step"):
            kwargs[k] = str(v)
        elif k == "anchor":
            if not isinstance(v, bool):
                raise ConfigError("gekf.anchor: expected true or false")
            kwargs["anchor"] = v
        else:
            kwargs[_GEKF[k]] = _number(v, f"gekf.{k}", integer=k == "n_substeps")
    return EscParams(**kwargs)


def from_dict(raw: dict) -> ScenarioConfig:
    """Build and validate a :class:`ScenarioConfig` from parsed YAML."""
    top = _section(raw, "", _TOP)
    for key in ("name", "horizon", "initial_position", "field", "esc"):
        if key not in top:
            raise ConfigError(f"{key} is required")
    params = _params(top["esc"], top.get("gekf"))
    noise = _section(top.get("noise"), "noise", _NOISE)
    sigma = _number(noise.get("sigma", 0.0), "noise.sigma")
    if sigma < 0:
        raise ConfigError("noise.sigma must be non-negative")
    seed = _number(top.get("seed", 0), "seed", integer=True)
    integ = _section(top.get("integrator"), "integrator", _INTEGRATOR)
    washout = top.get("initial_washout")
    return ScenarioConfig(
        name=str(top["name"]),
        field=_field(top["field"]),
        noise=NoiseModel(sigma, seed),
        params=params,
        initial_position=_pair(top["initial_position"], "initial_position"),
        horizon=_number(top["horizon"], "horizon"),
        variant=str(top.get("variant", "gekf")),
        seed=seed,
        initial_washout=None if washout is None else _number(washout, "initial_washout"),
        min_substeps=_number(integ.get("min_substeps", 1), "integrator.min_substeps", integer=True),
        steps_per_period=_number(integ.get("steps_per_period", 40), "integrator.steps_per_period", integer=True),
    )


def parse_config(source) -> ScenarioConfig:
    """Parse a scenario from a preset name, a YAML file path or a mapping."""
    if isinstance(source, dict):
        return from_dict(source)
    text = None
    if isinstance(source, str) and source in preset_names():
        text = preset_text(source)
    else:
        path = Path(source)
        if not path.is_file():
            raise ConfigError(f"unknown scenario {str(source)!r}; available presets: {', '.join(preset_names())}")
        text = path.read_text()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed scenario file: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("scenario file must contain a mapping at the top level")
    return from_dict(raw)


def to_dict(cfg: ScenarioConfig) -> dict:
    """Inverse of :func:`from_dict`; ``from_dict(to_dict(cfg)) == cfg``."""
    f, p = cfg.field, cfg.params
    fld = {"kind": f.kind, "peak": f.peak_value}
    wps = f.schedule.waypoints
    if len(wps) == 1:
        fld["center"] = list(wps[0][1])
    else:
        fld["schedule"] = [[t, x, y] for t, (x, y) in wps]
    if f.kind == "quadratic":
        fld["curvature"] = list(f.shape)
    elif f.kind == "gaussian":
        fld["widths"] = list(f.shape)
    if f.terms:
        fld["terms"] = [list(t) for t in f.terms]
    return {
        "name": cfg.name,
        "variant": cfg.variant,
        "seed": cfg.seed,
        "horizon": cfg.horizon,
        "initial_position": list(cfg.initial_position),
        "initial_washout": cfg.initial_washout,
        "field": fld,
        "noise": {"sigma": cfg.noise.sigma},
        "esc": {k: getattr(p, attr) for k, attr in _ESC.items()},
        "gekf": {k: getattr(p, attr) for k, attr in _GEKF.items()},
        "integrator": {"min_substeps": cfg.min_substeps, "steps_per_period": cfg.steps_per_period},
    }


def dump_config(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(to_dict(cfg), sort_keys=False)
