"""Continuous multilayer diffusion problem.

A problem is a stack of contiguous layers ``[l_0, l_1, ..., l_m]``, each with
its own diffusivity ``D_i`` and conductivity ``gamma_i``, closed by Robin-type
boundary conditions

    a_L u(l_0) - b_L u_x(l_0) = c_L,     a_R u(l_m) + b_R u_x(l_m) = c_R

and one interface condition per internal interface.  Interfaces are stored in
one of two general forms:

``GI``   u_i = theta_i u_{i+1},  gamma_i u_i,x = gamma_{i+1} u_{i+1},x
``GII``  gamma_i u_i,x = H_i (theta_i u_{i+1} - u_i),  same flux continuity

The physical interface types I-IV reduce to these via
:func:`canonicalize_interface`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

InitialFunction = Callable[[np.ndarray], Union[np.ndarray, float]]

TOL_CONTIGUOUS = 1e-12


class ProblemError(ValueError):
    """Raised when a problem definition violates one or more invariants.

    ``errors`` holds every violation found, not just the first.
    """

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def zero_initial(x):
    return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Layer:
    """One layer ``[left, right]`` of the medium.

    ``conductivity`` defaults to the diffusivity, which is the setting used by
    interface types I, II and IV.  ``initial`` is evaluated lazily at mesh
    nodes; it should accept a numpy array.
    """

    left: float
    right: float
    diffusivity: float
    conductivity: Optional[float] = None
    initial: InitialFunction = zero_initial

    def __post_init__(self):
        if self.conductivity is None:
            object.__setattr__(self, "conductivity", self.diffusivity)

    @property
    def width(self) -> float:
        return self.right - self.left

    def sample(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        try:
            values = self.initial(x)
        except TypeError:
            values = [self.initial(float(xi)) for xi in x]
        return np.array(np.broadcast_to(np.asarray(values, dtype=float), x.shape))


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary condition ``a u -/+ b u_x = c`` (sign depends on the side)."""

    a: float
    b: float
    c: float = 0.0

    @property
    def is_dirichlet(self) -> bool:
        return self.b == 0

    @property
    def is_neumann(self) -> bool:
        return self.a == 0

    @property
    def kind(self) -> str:
        if self.is_dirichlet:
            return "Dirichlet"
        if self.is_neumann:
            return "Neumann"
        return "Robin"


@dataclass(frozen=True)
class InterfaceSpec:
    kind: str  # "GI" or "GII"
    theta: float = 1.0
    transfer: Optional[float] = None

    @classmethod
    def gi(cls, theta: float = 1.0) -> "InterfaceSpec":
        return cls("GI", theta=theta)

    @classmethod
    def gii(cls, transfer: float, theta: float = 1.0) -> "InterfaceSpec":
        return cls("GII", theta=theta, transfer=transfer)


@dataclass(frozen=True)
class Problem:
    layers: tuple
    bc_left: BoundarySpec
    bc_right: BoundarySpec
    interfaces: tuple = field(default_factory=tuple)
    # Original Type I-IV labels per interface, kept for reporting/round-trip.
    interface_origin: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(self, "interfaces", tuple(self.interfaces))
        origin = tuple(self.interface_origin) or tuple(s.kind for s in self.interfaces)
        object.__setattr__(self, "interface_origin", origin)

    @property
    def m(self) -> int:
        return len(self.layers)

    @property
    def breakpoints(self) -> np.ndarray:
        """``[l_0, l_1, ..., l_m]``."""
        return np.array([self.layers[0].left] + [layer.right for layer in self.layers])


def _check_positive(value, name, errors):
    if value is None or not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        errors.append(f"{name} must be a positive finite number, got {value!r}")


def validate(problem: Problem) -> Problem:
    """Return ``problem`` unchanged if valid, else raise :class:`ProblemError`
    listing every violated invariant."""
    errors = []
    layers = problem.layers
    if len(layers) == 0:
        errors.append("problem has no layers")
    for i, layer in enumerate(layers, start=1):
        if not (layer.right > layer.left):
            errors.append(f"layer {i}: right ({layer.right}) must exceed left ({layer.left})")
        _check_positive(layer.diffusivity, f"layer {i}: diffusivity", errors)
        _check_positive(layer.conductivity, f"layer {i}: conductivity", errors)
        if not callable(layer.initial):
            errors.append(f"layer {i}: initial condition is not callable")
    for i in range(len(layers) - 1):
        gap = abs(layers[i].right - layers[i + 1].left)
        if gap > TOL_CONTIGUOUS * max(1.0, abs(layers[i].right)):
            errors.append(
                f"layers {i + 1} and {i + 2} are not contiguous "
                f"({layers[i].right} != {layers[i + 1].left})"
            )

    for side, bc in (("left", problem.bc_left), ("right", problem.bc_right)):
        if bc.a < 0:
            errors.append(f"{side} boundary: a must be non-negative, got {bc.a}")
        if bc.b < 0:
            errors.append(f"{side} boundary: b must be non-negative, got {bc.b}")
        if bc.a == 0 and bc.b == 0:
            errors.append(f"{side} boundary: a = b = 0, the boundary condition vanishes")
    if problem.bc_left.a == 0 and problem.bc_right.a == 0:
        errors.append("Neumann conditions on both boundaries (a_L = a_R = 0) are not supported")

    expected = max(len(layers) - 1, 0)
    if len(problem.interfaces) != expected:
        errors.append(f"expected {expected} interface specs, got {len(problem.interfaces)}")
    for i, spec in enumerate(problem.interfaces, start=1):
        if spec.kind not in ("GI", "GII"):
            errors.append(f"interface {i}: kind must be GI or GII, got {spec.kind!r}")
            continue
        _check_positive(spec.theta, f"interface {i}: theta", errors)
        if spec.kind == "GII":
            if spec.transfer is not None and math.isinf(spec.transfer):
                errors.append(
                    f"interface {i}: GII with infinite transfer coefficient; use a GI interface"
                )
            else:
                _check_positive(spec.transfer, f"interface {i}: transfer coefficient H", errors)
        elif spec.transfer is not None:
            errors.append(f"interface {i}: GI interface does not take a transfer coefficient")

    if errors:
        raise ProblemError(errors)
    return problem


_KIND_PARAMS = {
    "I": set(),
    "II": {"H"},
    "III": {"gamma"},
    "IV": {"theta"},
    "GI": {"theta"},
    "GII": {"H", "theta"},
}
_REQUIRED = {"I": set(), "II": {"H"}, "III": {"gamma"}, "IV": {"theta"}, "GI": set(), "GII": {"H"}}


def canonicalize_interface(kind: str, left_layer: Layer, right_layer: Layer, **params):
    """Reduce an interface of type I-IV (or GI/GII) to its general form.

    Returns ``(spec, left_layer, right_layer)`` where the layers carry the
    conductivities implied by the interface type.  Accepted parameters:
    ``H`` (type II, GII), ``gamma=(g_left, g_right)`` (type III),
    ``theta`` (type IV, GI, GII).

    >>> a = Layer(0.0, 0.5, 1.0); b = Layer(0.5, 1.0, 0.1)
    >>> spec, a2, b2 = canonicalize_interface("I", a, b)
    >>> spec.kind, spec.theta, a2.conductivity, b2.conductivity
    ('GI', 1.0, 1.0, 0.1)
    """
    if kind not in _KIND_PARAMS:
        raise ProblemError([f"unknown interface kind {kind!r}"])
    given = {k for k, v in params.items() if v is not None}
    errors = []
    extra = given - _KIND_PARAMS[kind]
    missing = _REQUIRED[kind] - given
    if extra:
        errors.append(f"type {kind} interface does not take {sorted(extra)}")
    if missing:
        errors.append(f"type {kind} interface requires {sorted(missing)}")
    if errors:
        raise ProblemError(errors)

    theta = params.get("theta")
    theta = 1.0 if theta is None else float(theta)
    H = params.get("H")
    _check_positive(theta, "theta", errors)
    if H is not None:
        if math.isinf(H):
            errors.append("infinite transfer coefficient H; use a type I / GI interface")
        else:
            _check_positive(H, "H", errors)

    if kind == "III":
        gamma = params["gamma"]
        if len(gamma) != 2:
            errors.append("type III interface needs a conductivity pair (gamma_i, gamma_{i+1})")
            raise ProblemError(errors)
        g_left, g_right = float(gamma[0]), float(gamma[1])
        _check_positive(g_left, "gamma_i", errors)
        _check_positive(g_right, "gamma_{i+1}", errors)
    elif kind in ("GI", "GII"):
        g_left, g_right = left_layer.conductivity, right_layer.conductivity
    else:
        g_left, g_right = left_layer.diffusivity, right_layer.diffusivity
    if errors:
        raise ProblemError(errors)

    if kind in ("II", "GII"):
        spec = InterfaceSpec.gii(float(H), theta)
    else:
        spec = InterfaceSpec.gi(theta)
    return (
        spec,
        replace(left_layer, conductivity=g_left),
        replace(right_layer, conductivity=g_right),
    )


def build_problem(layers, bc_left: BoundarySpec, bc_right: BoundarySpec, interfaces=()) -> Problem:
    """Assemble and validate a :class:`Problem`.

    ``interfaces`` items are either :class:`InterfaceSpec` (GI/GII, using the
    layers' own conductivities) or mappings ``{"kind": "I".."IV"|"GI"|"GII",
    ...params}``.  A layer shared by two interfaces that demand different
    conductivities is rejected.
    """
    layers = list(layers)
    if not layers:
        raise ProblemError(["problem has no layers"])
    specs = []
    origin = []
    demanded = {}  # layer index -> (conductivity, interface number)
    errors = []
    for i, item in enumerate(interfaces):
        if i + 1 >= len(layers):
            errors.append(f"interface {i + 1} has no layer on its right")
            break
        if isinstance(item, InterfaceSpec):
            specs.append(item)
            origin.append(item.kind)
            continue
        params = dict(item)
        kind = params.pop("kind")
        try:
            spec, left, right = canonicalize_interface(kind, layers[i], layers[i + 1], **params)
        except ProblemError as exc:
            errors.extend(f"interface {i + 1}: {e}" for e in exc.errors)
            continue
        for idx, layer in ((i, left), (i + 1, right)):
            prev = demanded.get(idx)
            if prev is not None and not math.isclose(prev[0], layer.conductivity, rel_tol=1e-14):
                errors.append(
                    f"layer {idx + 1}: interface {prev[1]} sets conductivity {prev[0]} "
                    f"but interface {i + 1} sets {layer.conductivity}"
                )
            demanded[idx] = (layer.conductivity, i + 1)
        layers[i], layers[i + 1] = left, right
        specs.append(spec)
        origin.append(kind)
    if errors:
        raise ProblemError(errors)
    return validate(Problem(tuple(layers), bc_left, bc_right, tuple(specs), tuple(origin)))
