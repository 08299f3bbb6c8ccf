"""Fixed-step time integration of ``du/dt = A u + b``."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from . import _kernels
from .discretise import SemiDiscreteSystem, UnknownMap, reconstruct_full
from .problem import Problem
from .tridiag import ThomasFactor, TriDiag, matvec, thomas_solve

DIVERGENCE_FACTOR = 1e6
COMMENSURATE_SLACK = 1e-9


class Scheme(str, enum.Enum):
    FORWARD_EULER = "forward_euler"
    BACKWARD_EULER = "backward_euler"
    CRANK_NICOLSON = "crank_nicolson"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {"fe": "forward_euler", "be": "backward_euler", "cn": "crank_nicolson"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(
                f"unknown scheme {value!r}; expected one of {[s.value for s in cls]}"
            ) from None

    @property
    def weights(self):
        """``(explicit, implicit)`` fractions of ``tau``."""
        return {
            Scheme.FORWARD_EULER: (1.0, 0.0),
            Scheme.BACKWARD_EULER: (0.0, 1.0),
            Scheme.CRANK_NICOLSON: (0.5, 0.5),
        }[self]


class StepCountError(ValueError):
    """A requested time is not an integer number of steps."""


@dataclass
class MarchResult:
    times: List[float]
    states: List[np.ndarray]  # full-node values, each (m, n+1)
    final: np.ndarray
    step_count: int
    tau: float
    scheme: Scheme
    diverged: bool = False
    diverged_at_step: Optional[int] = None


def step(scheme, A: TriDiag, b, tau: float, u) -> np.ndarray:
    """Advance ``u`` by one step of ``scheme``."""
    scheme = Scheme.parse(scheme)
    if not tau > 0:
        raise ValueError(f"time step must be positive, got {tau}")
    u = np.asarray(u, dtype=float)
    b = np.asarray(b, dtype=float)
    explicit, implicit = scheme.weights
    rhs = u + explicit * tau * matvec(A, u) + tau * b
    if implicit == 0.0:
        return rhs
    return thomas_solve(A.shifted(-implicit * tau), rhs)


def steps_for(t: float, tau: float) -> int:
    """Integer ``K`` with ``t = K tau`` up to ``1e-9 tau``, else raise."""
    k = round(t / tau)
    if k < 0 or abs(t - k * tau) > COMMENSURATE_SLACK * tau:
        raise StepCountError(f"time {t!r} is not an integer multiple of tau = {tau!r}")
    return int(k)


class Integrator:
    """Holds ``A``, ``b`` and the factored implicit operator for repeated
    stepping at a fixed ``tau``."""

    def __init__(self, system: SemiDiscreteSystem, tau: float, scheme):
        self.scheme = Scheme.parse(scheme)
        if not tau > 0:
            raise ValueError(f"time step must be positive, got {tau}")
        self.tau = float(tau)
        A = system.A
        self.A = A
        self.b = np.asarray(system.b, dtype=float)
        explicit, implicit = self.scheme.weights
        self.alpha = explicit * self.tau
        self.implicit = implicit > 0
        if self.implicit:
            fac = ThomasFactor(A.shifted(-implicit * self.tau))
            self._fac = (np.ascontiguousarray(fac.sub), fac.cprime, fac.inv_w)
        else:
            self._fac = (np.zeros(0), np.zeros(0), np.zeros(0))

    def run(self, u, nsteps: int, limit: float = math.inf):
        """Take ``nsteps`` steps; stop early once ``max|u| > limit``.

        Returns ``(u, steps_taken, diverged)``.
        """
        u = np.ascontiguousarray(u, dtype=float)
        if nsteps == 0:
            return u.copy(), 0, False
        lsub, cprime, inv_w = self._fac
        return _kernels.run_steps(
            self.A.sub, self.A.diag, self.A.sup, self.b,
            self.alpha, self.tau, self.implicit, lsub, cprime, inv_w,
            u, int(nsteps), float(limit),
        )


def steady_state(system: SemiDiscreteSystem) -> np.ndarray:
    """``u_inf = -A^{-1} b``."""
    return thomas_solve(system.A, -np.asarray(system.b, dtype=float))


def march(
    system: SemiDiscreteSystem,
    u0,
    tau: float,
    t_end: float,
    scheme,
    snapshots: Sequence[float] = (),
    umap: UnknownMap = None,
    problem: Problem = None,
    detect_divergence: bool = True,
) -> MarchResult:
    """March from ``u0`` to ``t_end`` with fixed step ``tau``.

    Snapshot times (and ``t_end``) must be integer multiples of ``tau``.
    States are reconstructed on the full node set when ``umap`` is given,
    otherwise the raw unknown vectors are stored.  Divergence is declared
    once ``max|u|`` exceeds ``1e6 * (max|u0| + max|u_inf|)``; the march then
    stops and the result is flagged.
    """
    scheme = Scheme.parse(scheme)
    integ = Integrator(system, tau, scheme)
    total = steps_for(t_end, tau)
    marks = sorted({steps_for(t, tau) for t in snapshots})
    if marks and marks[-1] > total:
        raise StepCountError(f"snapshot at step {marks[-1]} lies beyond t_end (step {total})")
    if not marks or marks[-1] != total:
        marks.append(total)

    u = np.asarray(u0, dtype=float).copy()
    limit = math.inf
    if detect_divergence:
        ref = np.max(np.abs(u), initial=0.0) + np.max(np.abs(steady_state(system)), initial=0.0)
        limit = DIVERGENCE_FACTOR * max(ref, 1e-300)

    def full(vec):
        return reconstruct_full(umap, vec, problem) if umap is not None else vec.copy()

    wanted = {steps_for(t, tau) for t in snapshots}
    times, states = [], []
    if 0 in wanted:
        times.append(0.0)
        states.append(full(u))
    done = 0
    diverged = False
    for mark in marks:
        if mark == 0:
            continue
        u, taken, diverged = integ.run(u, mark - done, limit)
        done += taken
        if diverged:
            break
        if mark in wanted:
            times.append(mark * tau)
            states.append(full(u))
    return MarchResult(
        times=times,
        states=states,
        final=full(u),
        step_count=done,
        tau=float(tau),
        scheme=scheme,
        diverged=diverged,
        diverged_at_step=done if diverged else None,
    )
