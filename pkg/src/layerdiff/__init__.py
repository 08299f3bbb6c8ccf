"""Finite volume solution of one-dimensional multilayer diffusion problems,
with forward Euler stability bounds that account for the interfaces."""
from .problem import (
    BoundarySpec,
    InterfaceSpec,
    Layer,
    Problem,
    ProblemError,
    build_problem,
    canonicalize_interface,
    validate,
)
from .discretise import (
    Mesh,
    SemiDiscreteSystem,
    UnknownMap,
    assemble,
    build_mesh,
    discretise,
    index_unknowns,
    reconstruct_full,
    sample_initial,
)
from .tridiag import TriDiag, eigenvalues, principal_minors, symmetrize, thomas_solve
from .stepper import MarchResult, Scheme, march, steady_state, step
from .stability import (
    gershgorin_bound,
    spectral_verdict,
    stability_report,
    table1_bounds,
)
from .verify import convergence_study, fine_grid_oracle, relative_error

__version__ = "0.1.0"
