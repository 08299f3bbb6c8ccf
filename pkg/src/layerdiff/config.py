"""JSON run configuration: parsing, validation and re-serialisation.

A config looks like::

    {
      "schema_version": 1,
      "problem": {
        "layers": [{"left": 0, "right": 0.5, "D": 1.0, "initial": "0"}, ...],
        "boundaries": {"left": {"a": 1, "b": 0, "c": 1},
                       "right": {"a": 0, "b": 1, "c": 0}},
        "interfaces": [{"kind": "II", "H": 0.5}]
      },
      "n": 20, "scheme": "forward_euler", "tau": "auto",
      "t_end": 0.2, "snapshots": [0.05, 0.2],
      "study": {"h_list": [0.125, 0.0625], "t_eval": 0.2, "tau": 1e-7,
                "schemes": ["forward_euler"], "refine": 16},
      "output_dir": "out"
    }

Initial conditions are expression strings in ``x`` built from numbers,
``+ - * / ^`` and parentheses.
"""
from __future__ import annotations

import ast
import json
import math
import operator
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from .problem import BoundarySpec, Layer, Problem, ProblemError, build_problem
from .stepper import Scheme

SCHEMA_VERSION = 1
AUTO = "auto"

PRESETS = {
    "paper": {"tau": 1e-7, "h_list": [2.0**-k for k in range(3, 8)], "t_eval": 0.2},
    # tau = 1e-5 puts the first-order temporal error of the Euler schemes on
    # par with the spatial error at h = 2^-7, so the reduced study stops at 2^-6
    "ci": {"tau": 1e-5, "h_list": [2.0**-k for k in range(3, 7)], "t_eval": 0.2},
}
ALL_SCHEMES = [s.value for s in Scheme]


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}


@dataclass(frozen=True)
class Expression:
    """Initial-condition expression in ``x``; callable on arrays.

    >>> Expression("1 - 2*x^2")(np.array([0.0, 0.5]))
    array([1. , 0.5])
    """

    source: str
    _tree: ast.AST = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        text = str(self.source).replace("^", "**")
        try:
            tree = ast.parse(text, mode="eval").body
        except SyntaxError as exc:
            raise ConfigError(f"cannot parse initial condition {self.source!r}: {exc.msg}") from None
        self._check(tree)
        object.__setattr__(self, "_tree", tree)

    def _check(self, node):
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            self._check(node.operand)
        elif isinstance(node, ast.Constant) and type(node.value) in (int, float):
            pass
        elif isinstance(node, ast.Name) and node.id == "x":
            pass
        else:
            raise ConfigError(
                f"initial condition {self.source!r}: only numbers, x, + - * / ^ and parentheses are allowed"
            )

    def _eval(self, node, x):
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, x), self._eval(node.right, x))
        if isinstance(node, ast.UnaryOp):
            return _UNOPS[type(node.op)](self._eval(node.operand, x))
        if isinstance(node, ast.Constant):
            return float(node.value)
        return x

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self._eval(self._tree, x), x.shape).astype(float)


@dataclass
class StudyConfig:
    h_list: List[float]
    t_eval: float
    tau: float
    schemes: List[str]
    refine: int = 16


@dataclass
class RunConfig:
    problem: Problem
    raw_problem: dict
    n: int = 20
    scheme: Scheme = Scheme.FORWARD_EULER
    tau: Union[float, str, None] = None
    t_end: Optional[float] = None
    snapshots: List[float] = field(default_factory=list)
    study: Optional[StudyConfig] = None
    output_dir: Optional[str] = None

    @property
    def tau_is_auto(self) -> bool:
        return self.tau == AUTO


def _number(value, name, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value) or (positive and value <= 0):
        raise ConfigError(f"{name} must be {'positive and ' if positive else ''}finite, got {value!r}")
    return value


def _require(mapping, key, where):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{where} must be an object")
    if key not in mapping:
        raise ConfigError(f"{where} is missing {key!r}")
    return mapping[key]


def _layer(spec, k):
    where = f"layer {k + 1}"
    known = {"left", "right", "D", "gamma", "initial"}
    extra = set(spec) - known if isinstance(spec, dict) else set()
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")
    gamma = spec.get("gamma") if isinstance(spec, dict) else None
    return Layer(
        left=_number(_require(spec, "left", where), f"{where} left"),
        right=_number(_require(spec, "right", where), f"{where} right"),
        diffusivity=_number(_require(spec, "D", where), f"{where} D"),
        conductivity=None if gamma is None else _number(gamma, f"{where} gamma"),
        initial=Expression(str(spec.get("initial", "0"))),
    )


def _boundary(spec, side):
    where = f"{side} boundary"
    return BoundarySpec(
        a=_number(_require(spec, "a", where), f"{where} a"),
        b=_number(_require(spec, "b", where), f"{where} b"),
        c=_number(spec.get("c", 0.0), f"{where} c"),
    )


def _interface(spec, k):
    where = f"interface {k + 1}"
    kind = _require(spec, "kind", where)
    params = {"kind": str(kind)}
    for key, value in spec.items():
        if key in ("kind", "canonicalized_from"):
            continue
        if key == "gamma":
            if not isinstance(value, (list, tuple)):
                raise ConfigError(f"{where}: gamma must be a pair")
            params[key] = tuple(_number(v, f"{where} gamma") for v in value)
        else:
            params[key] = _number(value, f"{where} {key}")
    return params


def parse_problem(raw: dict) -> Problem:
    layers_raw = _require(raw, "layers", "problem")
    if not isinstance(layers_raw, list):
        raise ConfigError("problem.layers must be a list")
    layers = [_layer(spec, k) for k, spec in enumerate(layers_raw)]
    bounds = _require(raw, "boundaries", "problem")
    left = _boundary(_require(bounds, "left", "boundaries"), "left")
    right = _boundary(_require(bounds, "right", "boundaries"), "right")
    raw_ifaces = raw.get("interfaces", [])
    if not isinstance(raw_ifaces, list):
        raise ConfigError("problem.interfaces must be a list")
    interfaces = [_interface(spec, k) for k, spec in enumerate(raw_ifaces)]
    problem = build_problem(layers, left, right, interfaces)
    origin = [spec.get("canonicalized_from", p["kind"]) for spec, p in zip(raw_ifaces, interfaces)]
    return replace(problem, interface_origin=tuple(origin))


def _study(raw, preset):
    raw = dict(raw or {})
    if preset is not None:
        for key, value in PRESETS[preset].items():
            raw[key] = value
    if not raw:
        return None
    h_list = [_number(h, "study h_list entry", positive=True) for h in _require(raw, "h_list", "study")]
    if not h_list:
        raise ConfigError("study.h_list is empty")
    tau = _require(raw, "tau", "study")
    if tau == AUTO:
        raise ConfigError('study tau "auto" is not supported; give a number')
    schemes = raw.get("schemes", ALL_SCHEMES)
    if isinstance(schemes, str):
        schemes = [schemes]
    try:
        schemes = [Scheme.parse(s).value for s in schemes]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    refine = raw.get("refine", 16)
    if not isinstance(refine, int) or isinstance(refine, bool) or refine < 1:
        raise ConfigError(f"study refine must be a positive integer, got {refine!r}")
    return StudyConfig(
        h_list=h_list,
        t_eval=_number(_require(raw, "t_eval", "study"), "study t_eval", positive=True),
        tau=_number(tau, "study tau", positive=True),
        schemes=schemes,
        refine=refine,
    )


def parse_config(raw: dict, preset: Optional[str] = None) -> RunConfig:
    """Validate a decoded JSON config and build a :class:`RunConfig`."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION}")
    raw_problem = _require(raw, "problem", "config")
    problem = parse_problem(raw_problem)

    n = raw.get("n", 20)
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise ConfigError(f"n must be an integer >= 2, got {n!r}")
    try:
        scheme = Scheme.parse(raw.get("scheme", "forward_euler"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    tau = raw.get("tau")
    if tau is not None and tau != AUTO:
        tau = _number(tau, "tau", positive=True)
    t_end = raw.get("t_end")
    if t_end is not None:
        t_end = _number(t_end, "t_end")
        if t_end < 0:
            raise ConfigError(f"t_end must be non-negative, got {t_end}")
    snapshots = [_number(t, "snapshot time") for t in raw.get("snapshots", [])]
    if any(t < 0 for t in snapshots):
        raise ConfigError("snapshot times must be non-negative")
    if t_end is not None and any(t > t_end for t in snapshots):
        raise ConfigError("snapshot times must not exceed t_end")
    if preset is not None and preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}")
    return RunConfig(
        problem=problem,
        raw_problem=raw_problem,
        n=n,
        scheme=scheme,
        tau=tau,
        t_end=t_end,
        snapshots=snapshots,
        study=_study(raw.get("study"), preset),
        output_dir=raw.get("output_dir"),
    )


def load_config(path, preset: Optional[str] = None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return parse_config(raw, preset)


def problem_to_dict(problem: Problem) -> dict:
    """Serialise ``problem`` in canonical form.

    Interfaces come out as GI/GII with every layer's conductivity explicit;
    the original type is kept under ``canonicalized_from``.
    """
    layers = []
    for layer in problem.layers:
        init = layer.initial
        if not isinstance(init, Expression):
            raise ConfigError("only expression initial conditions can be serialised")
        layers.append({
            "left": layer.left,
            "right": layer.right,
            "D": layer.diffusivity,
            "gamma": layer.conductivity,
            "initial": init.source,
        })
    interfaces = []
    for spec, origin in zip(problem.interfaces, problem.interface_origin):
        item = {"kind": spec.kind, "theta": spec.theta}
        if spec.kind == "GII":
            item["H"] = spec.transfer
        if origin != spec.kind:
            item["canonicalized_from"] = origin
        interfaces.append(item)
    return {
        "layers": layers,
        "boundaries": {
            side: {"a": bc.a, "b": bc.b, "c": bc.c}
            for side, bc in (("left", problem.bc_left), ("right", problem.bc_right))
        },
        "interfaces": interfaces,
    }


def config_to_dict(cfg: RunConfig) -> dict:
    out = {"schema_version": SCHEMA_VERSION, "problem": problem_to_dict(cfg.problem), "n": cfg.n,
           "scheme": cfg.scheme.value}
    if cfg.tau is not None:
        out["tau"] = cfg.tau
    if cfg.t_end is not None:
        out["t_end"] = cfg.t_end
    if cfg.snapshots:
        out["snapshots"] = list(cfg.snapshots)
    if cfg.study is not None:
        s = cfg.study
        out["study"] = {"h_list": s.h_list, "t_eval": s.t_eval, "tau": s.tau,
                        "schemes": s.schemes, "refine": s.refine}
    if cfg.output_dir is not None:
        out["output_dir"] = cfg.output_dir
    return out
