"""Forward Euler time-step limits and spectral stability verdicts.

Two independent routes to the same sufficient condition are provided:

* :func:`gershgorin_bound` reads row magnitudes off an assembled matrix and
  requires every Gershgorin interval of ``tau A`` to sit inside the forward
  Euler stability disc, ``c_p + r_p <= 2``;
* :func:`table1_bounds` evaluates the closed-form bound for each class of
  finite volume equation straight from the problem parameters.

:func:`spectral_verdict` gives the exact answer from the eigenvalues.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .discretise import Mesh, UnknownMap, assemble, build_mesh, index_unknowns
from .problem import Problem
from .tridiag import TriDiag, eigenvalues, symmetrize

NO_EXTRA = "No additional restriction"


@dataclass(frozen=True)
class GershgorinRow:
    p: int
    c: float  # -a_pp
    r: float  # |a_p,p-1| + |a_p,p+1|
    tau_max: float  # 2 / (c + r)
    kind: str = ""


def gershgorin_bound(A: TriDiag, row_kind: Sequence[str] = None):
    """Per-row Gershgorin data and ``tau_max = min_p 2 / (c_p + r_p)``.

    ``c_p`` and ``r_p`` are the tau-free row magnitudes of ``A``.
    """
    c = -A.diag
    bad = np.flatnonzero(~(c > 0))
    if bad.size:
        raise ValueError(f"diagonal entries must be negative; rows {bad.tolist()} are not")
    r = np.zeros(A.n)
    r[:-1] += np.abs(A.sup)
    r[1:] += np.abs(A.sub)
    taus = 2.0 / (c + r)
    kinds = list(row_kind) if row_kind is not None else [""] * A.n
    rows = [GershgorinRow(p, float(c[p]), float(r[p]), float(taus[p]), kinds[p]) for p in range(A.n)]
    return rows, float(np.min(taus))


@dataclass(frozen=True)
class Bound:
    label: str
    tau: float
    note: str = ""
    parts: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(self, "parts", tuple(float(x) for x in self.parts))


def _classical(D, h):
    return float(h * h / (2 * D))


def _neighbour_weight(problem: Problem, umap: UnknownMap, node):
    """Weight with which an interior-type row sees neighbour ``node`` after
    elimination: 1 if retained, 0 if Dirichlet, the GI factor otherwise."""
    elim = umap.eliminated.get(node)
    if elim is None:
        return 1.0, None
    if elim.source is None:
        return 0.0, "dirichlet"
    return elim.factor, elim.rule


def table1_bounds(problem: Problem, mesh: Mesh):
    """Closed-form forward Euler bounds for every class of finite volume
    equation present at this resolution.

    Returns ``(bounds, tau_max, binding)`` where ``binding`` is the
    :class:`Bound` attaining the minimum.  Classes whose bound is never below
    the interior bound of their layer carry the note ``NO_EXTRA``.
    """
    umap = index_unknowns(problem, mesh)
    n, m = mesh.n, problem.m
    bounds: List[Bound] = []
    L = problem.layers

    # interior-type equations, grouped by how their neighbours were eliminated
    for i in range(m):
        D, h = L[i].diffusivity, mesh.h[i]
        seen = set()
        for j in range(1, n):
            wl, left = _neighbour_weight(problem, umap, (i, j - 1))
            wr, right = _neighbour_weight(problem, umap, (i, j + 1))
            key = (left, right)
            if key in seen:
                continue
            seen.add(key)
            if left is None and right is None:
                bounds.append(Bound(f"interior layer {i + 1}", _classical(D, h)))
                continue
            tags = []
            if left == "dirichlet" or right == "dirichlet":
                tags.append("Dirichlet-adjacent")
            if left == "gi-right":
                tags.append(f"GI-adjacent right of interface {i}")
            if right == "gi-left":
                tags.append(f"GI-adjacent left of interface {i + 1}")
            label = f"layer {i + 1} " + " + ".join(tags)
            if (left, right) in (("dirichlet", None), (None, "dirichlet")):
                tau = 4.0 / 3.0 * _classical(D, h)
            elif left == "gi-right" and right is None:
                th = problem.interfaces[i - 1].theta
                tau = 4 * th / (3 * th + 1) * _classical(D, h)
            elif right == "gi-left" and left is None:
                th = problem.interfaces[i].theta
                tau = 4 / (3 + th) * _classical(D, h)
            else:
                # both neighbours modified (only possible for n = 2)
                tau = 4 / (2 + wl + wr) * _classical(D, h)
            bounds.append(Bound(label, tau, NO_EXTRA if tau >= _classical(D, h) else ""))

    for side, bc, D, h in (
        ("left", problem.bc_left, L[0].diffusivity, mesh.h[0]),
        ("right", problem.bc_right, L[-1].diffusivity, mesh.h[-1]),
    ):
        if bc.is_dirichlet:
            continue  # covered by the Dirichlet-adjacent class above
        tau = 2 * bc.b / (2 * bc.b + bc.a * h) * _classical(D, h)
        bounds.append(
            Bound(f"{side} boundary ({bc.kind})", tau, NO_EXTRA if bc.is_neumann else "")
        )

    for k, spec in enumerate(problem.interfaces):
        DL, DR = L[k].diffusivity, L[k + 1].diffusivity
        gL, gR = L[k].conductivity, L[k + 1].conductivity
        hL, hR = mesh.h[k], mesh.h[k + 1]
        th = spec.theta
        if spec.kind == "GI":
            num = (gL * hL * th * DR + gR * hR * DL) * hL * hR
            if th >= 1:
                tau = num / ((2 * th * gL * hR + (1 + th) * gR * hL) * DL * DR)
                note = NO_EXTRA if th == 1 else ""
                bounds.append(Bound(f"interface {k + 1} (GI, theta >= 1)", tau, note))
            else:
                tau = num / (((1 + th) * gL * hR + 2 * gR * hL) * DL * DR)
                bounds.append(Bound(f"interface {k + 1} (GI, theta < 1)", tau))
        else:
            H = spec.transfer
            left = 2 * gL / ((1 + th) * H * hL + 2 * gL) * _classical(DL, hL)
            right = 2 * gR / ((1 + th) * H * hR + 2 * gR) * _classical(DR, hR)
            bounds.append(Bound(f"interface {k + 1} (GII)", min(left, right), "", (left, right)))

    binding = min(bounds, key=lambda bd: bd.tau)
    return bounds, binding.tau, binding


@dataclass(frozen=True)
class SpectralVerdict:
    tau: float
    rho_forward: float
    rho_backward: float
    rho_crank_nicolson: float

    @property
    def stable_forward(self) -> bool:
        return self.rho_forward <= 1.0

    @property
    def stable_backward(self) -> bool:
        return self.rho_backward <= 1.0

    @property
    def stable_crank_nicolson(self) -> bool:
        return self.rho_crank_nicolson <= 1.0


def spectrum(A: TriDiag) -> np.ndarray:
    """Eigenvalues of ``A`` (real by the diagonal similarity), ascending."""
    return eigenvalues(symmetrize(A).S)


def spectral_radii(lam, tau: float) -> SpectralVerdict:
    lam = np.asarray(lam, dtype=float)
    z = tau * lam
    return SpectralVerdict(
        tau=float(tau),
        rho_forward=float(np.max(np.abs(1 + z))),
        rho_backward=float(np.max(1 / np.abs(1 - z))),
        rho_crank_nicolson=float(np.max(np.abs((1 + z / 2) / (1 - z / 2)))),
    )


def spectral_verdict(A: TriDiag, tau: float) -> SpectralVerdict:
    return spectral_radii(spectrum(A), tau)


def exact_forward_limit(lam) -> float:
    """Largest forward Euler step with ``rho <= 1``: ``2 / max|lambda|``."""
    return float(2.0 / np.max(np.abs(lam)))


@dataclass
class StabilityReport:
    rows: List[GershgorinRow]
    tau_max_gershgorin: float
    bounds: List[Bound]
    tau_max_table: float
    binding: Bound
    tau_classical: float
    tau_max_exact: float
    eigenvalue_range: tuple
    spectral: Optional[SpectralVerdict] = None

    def to_dict(self) -> dict:
        out = {
            "tau_max_table": self.tau_max_table,
            "tau_max_gershgorin": self.tau_max_gershgorin,
            "tau_max_exact": self.tau_max_exact,
            "tau_classical": self.tau_classical,
            "classical_over_table": self.tau_classical / self.tau_max_table,
            "binding": self.binding.label,
            "eigenvalue_min": self.eigenvalue_range[0],
            "eigenvalue_max": self.eigenvalue_range[1],
            "bounds": [
                {"label": b.label, "tau": b.tau, "note": b.note, **({"parts": list(b.parts)} if b.parts else {})}
                for b in self.bounds
            ],
            "rows": [
                {"p": r.p, "kind": r.kind, "c": r.c, "r": r.r, "tau_max": r.tau_max}
                for r in self.rows
            ],
        }
        if self.spectral is not None:
            s = self.spectral
            out["spectral"] = {
                "tau": s.tau,
                "rho_forward": s.rho_forward,
                "rho_backward": s.rho_backward,
                "rho_crank_nicolson": s.rho_crank_nicolson,
                "stable_forward": s.stable_forward,
                "stable_backward": s.stable_backward,
                "stable_crank_nicolson": s.stable_crank_nicolson,
            }
        return out


def stability_report(problem: Problem, n: int, tau: float = None) -> StabilityReport:
    mesh = build_mesh(problem, n)
    umap = index_unknowns(problem, mesh)
    system = assemble(problem, mesh, umap)
    rows, tau_g = gershgorin_bound(system.A, system.row_kind)
    bounds, tau_t, binding = table1_bounds(problem, mesh)
    lam = spectrum(system.A)
    classical = min(_classical(layer.diffusivity, h) for layer, h in zip(problem.layers, mesh.h))
    return StabilityReport(
        rows=rows,
        tau_max_gershgorin=tau_g,
        bounds=bounds,
        tau_max_table=tau_t,
        binding=binding,
        tau_classical=classical,
        tau_max_exact=exact_forward_limit(lam),
        eigenvalue_range=(float(lam[0]), float(lam[-1])),
        spectral=spectral_radii(lam, tau) if tau is not None else None,
    )
