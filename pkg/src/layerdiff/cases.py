"""Two-layer benchmark problems on ``[0, 0.5, 1]``.

Cases A-D share ``D = (1, 0.1)``, ``u = 1`` at ``x = 0``, zero flux at
``x = 1`` and zero initial data; they differ in the interface condition.
Cases E and F are forward Euler stability examples.
"""
from .problem import BoundarySpec, InterfaceSpec, Layer, Problem, build_problem

DIRICHLET_ONE = BoundarySpec(a=1.0, b=0.0, c=1.0)
DIRICHLET_ZERO = BoundarySpec(a=1.0, b=0.0, c=0.0)
NEUMANN_ZERO = BoundarySpec(a=0.0, b=1.0, c=0.0)


def _two_layers(D1, D2):
    return [Layer(0.0, 0.5, D1), Layer(0.5, 1.0, D2)]


def case_a() -> Problem:
    """Perfect contact (type I)."""
    return build_problem(_two_layers(1.0, 0.1), DIRICHLET_ONE, NEUMANN_ZERO, [{"kind": "I"}])


def case_b(H: float = 0.5) -> Problem:
    """Contact resistance (type II)."""
    return build_problem(_two_layers(1.0, 0.1), DIRICHLET_ONE, NEUMANN_ZERO, [{"kind": "II", "H": H}])


def case_c() -> Problem:
    """Partition coefficient 1.2 (type IV)."""
    return build_problem(
        _two_layers(1.0, 0.1), DIRICHLET_ONE, NEUMANN_ZERO, [{"kind": "IV", "theta": 1.2}]
    )


def case_d() -> Problem:
    """Heat-flux continuity with gamma = (2, 2) (type III)."""
    return build_problem(
        _two_layers(1.0, 0.1), DIRICHLET_ONE, NEUMANN_ZERO, [{"kind": "III", "gamma": (2.0, 2.0)}]
    )


def case_e() -> Problem:
    """Case B with H = 5; the interface row binds the forward Euler step."""
    return case_b(H=5.0)


def case_f() -> Problem:
    """Dirichlet at both ends, small conductivities and H = 0.5: the
    interface limit is ~63x below the classical per-layer limit."""
    layers = [Layer(0.0, 0.5, 0.1, conductivity=1e-4), Layer(0.5, 1.0, 0.2, conductivity=5e-4)]
    return build_problem(layers, DIRICHLET_ONE, DIRICHLET_ZERO, [InterfaceSpec.gii(0.5)])


CASES = {
    "A": case_a,
    "B": case_b,
    "C": case_c,
    "D": case_d,
    "E": case_e,
    "F": case_f,
}
