"""Declarative experiment configuration (YAML) with total validation."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import yaml

from .errors import ConfigError

EXPERIMENTS = ("spectra", "kernels", "jc3", "chain", "floquet", "compare")
BATH_KINDS = ("ohmic_exp", "ohmic_drude", "super_ohmic")
EQUATION_NAMES = (
    "redfield",
    "tdc-redfield",
    "game",
    "tdc-game",
    "rwa",
    "prwa",
    "cg-redfield",
    "dcg",
    "perlind",
    "perlind+rwa-ls",
    "ule",
)
_EQ_RE = re.compile(r"^([a-z+-]+)(?:\(([^)]*)\))?$")


@dataclass(frozen=True)
class EquationSpec:
    name: str
    param: float = None

    @property
    def label(self):
        return self.name if self.param is None else f"{self.name}({self.param:g})"


@dataclass
class ExperimentConfig:
    experiment: str
    model: dict
    bath: dict
    equations: list
    propagator: dict
    outputs: dict
    raw: dict = field(repr=False, default=None)


def parse_equation(text) -> EquationSpec:
    m = _EQ_RE.match(str(text).strip())
    if not m:
        raise ConfigError(f"equations: cannot parse {text!r}")
    name, param = m.group(1), m.group(2)
    if name not in EQUATION_NAMES:
        raise ConfigError(f"equations: unknown equation {name!r}")
    needs_param = name in ("prwa", "cg-redfield", "dcg")
    if needs_param and param is None:
        raise ConfigError(f"equations: {name} requires a parameter, e.g. {name}(8)")
    if not needs_param and param is not None:
        raise ConfigError(f"equations: {name} takes no parameter")
    if param is not None:
        try:
            value = float(param)
        except ValueError as exc:
            raise ConfigError(f"equations: bad parameter in {text!r}") from exc
        if name == "prwa" and (value < 1 or value != int(value)):
            raise ConfigError("equations: prwa bin count must be a positive integer")
        if name in ("dcg",) and value <= 0:
            raise ConfigError(f"equations: {name} time must be positive")
        if name == "cg-redfield" and value < 0:
            raise ConfigError("equations: cg-redfield T0 must be nonnegative")
        return EquationSpec(name=name, param=value)
    return EquationSpec(name=name)


def _require_mapping(raw, key, default=None):
    val = raw.get(key, default if default is not None else {})
    if not isinstance(val, dict):
        raise ConfigError(f"{key}: expected a mapping")
    return dict(val)


def parse_config(text) -> ExperimentConfig:
    """Parse and validate the YAML experiment description; fill defaults."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a mapping")
    unknown = set(raw) - {"experiment", "model", "bath", "equations", "propagator", "outputs"}
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    experiment = raw.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment: must be one of {EXPERIMENTS}, got {experiment!r}")

    model = _require_mapping(raw, "model")
    kind = model.setdefault("kind", "chain")
    if kind not in ("chain", "jc3"):
        raise ConfigError(f"model.kind: must be 'chain' or 'jc3', got {kind!r}")
    if kind == "chain":
        model.setdefault("n", 8)
        model.setdefault("j", 400.0)
        model.setdefault("eps_d", 6.0)
        model.setdefault("n_keep", 128)
        if model["n"] < 2:
            raise ConfigError("model.n: need at least two sites")
    else:
        preset = model.get("preset")
        if preset is not None:
            if preset not in ("case_a", "case_b"):
                raise ConfigError("model.preset: must be case_a or case_b")
            e1, e2 = (0.095, 0.105) if preset == "case_a" else (0.09975, 0.10025)
            model.setdefault("e1", e1)
            model.setdefault("e2", e2)
        if "e1" not in model or "e2" not in model:
            raise ConfigError("model: jc3 needs e1/e2 or a preset")
        if not (0 < model["e1"] <= model["e2"]):
            raise ConfigError("model: need 0 < e1 <= e2")

    bath = _require_mapping(raw, "bath")
    bath.setdefault("kind", "ohmic_exp")
    if bath["kind"] not in BATH_KINDS:
        raise ConfigError(f"bath.kind: must be one of {BATH_KINDS}")
    if kind == "chain":
        bath.setdefault("g_tot", 0.01)
        if "omega_c" not in bath:
            bath.setdefault("omega_c_mult", 6.0)  # units of the chain gap
    else:
        bath.setdefault("g", 0.001)
        bath.setdefault("omega_c", 1.0)

    eq_raw = raw.get("equations", [])
    if experiment == "compare" and not eq_raw:
        raise ConfigError("equations: a compare run needs at least one equation")
    if not isinstance(eq_raw, (list, tuple)):
        raise ConfigError("equations: expected a list")
    equations = [parse_equation(e) for e in eq_raw]

    prop = _require_mapping(raw, "propagator")
    prop.setdefault("dt_divisor", 64)
    prop.setdefault("eps", 1e-7)
    prop.setdefault("t_max_tfm", 30.0)
    prop.setdefault("store_every", 8)
    if prop["dt_divisor"] <= 0 or prop["eps"] <= 0 or prop["t_max_tfm"] <= 0:
        raise ConfigError("propagator: dt_divisor, eps and t_max_tfm must be positive")

    outputs = _require_mapping(raw, "outputs")
    outputs.setdefault("dir", "out")
    outputs.setdefault("reference", "redfield")
    outputs.setdefault("observables", ["trace", "purity"])

    return ExperimentConfig(
        experiment=experiment,
        model=model,
        bath=bath,
        equations=equations,
        propagator=prop,
        outputs=outputs,
        raw=raw,
    )
