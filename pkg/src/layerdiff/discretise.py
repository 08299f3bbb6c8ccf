"""Vertex-centred finite volume discretisation of a multilayer problem.

Each layer ``i`` gets ``n + 1`` equally spaced nodes ``x_{i,j} = l_{i-1} + j h_i``,
so every interface carries two coincident nodes.  Dirichlet boundary nodes
and one node per GI interface are eliminated, leaving ``N = m(n+1) - q - r``
unknowns and a tridiagonal semi-discrete system ``du/dt = A u + b``.

Indices are 0-based throughout: layer ``i`` runs over ``0..m-1`` and
interface ``i`` sits between layers ``i`` and ``i+1``.  Human-readable labels
use the 1-based numbering.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .problem import Problem
from .tridiag import TriDiag

Node = Tuple[int, int]


@dataclass(frozen=True)
class Mesh:
    n: int
    h: np.ndarray  # per-layer spacing, shape (m,)
    coords: np.ndarray  # shape (m, n+1)
    widths: np.ndarray  # control-volume widths, shape (m, n+1)

    @property
    def m(self) -> int:
        return self.h.shape[0]


def build_mesh(problem: Problem, n: int) -> Mesh:
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2 (at least one interior node per layer), got {n}")
    n = int(n)
    lefts = np.array([layer.left for layer in problem.layers])
    rights = np.array([layer.right for layer in problem.layers])
    h = (rights - lefts) / n
    j = np.arange(n + 1)
    coords = lefts[:, None] + j[None, :] * h[:, None]
    coords[:, -1] = rights  # duplicate interface nodes coincide exactly
    widths = np.repeat(h[:, None], n + 1, axis=1)
    widths[:, 0] *= 0.5
    widths[:, -1] *= 0.5
    return Mesh(n, h, coords, widths)


@dataclass(frozen=True)
class Elimination:
    """Rule recovering an eliminated node: ``value`` if ``source`` is None,
    otherwise ``factor * u[source]``."""

    rule: str  # "dirichlet", "gi-right" or "gi-left"
    source: Optional[Node] = None
    factor: float = 0.0
    value: float = 0.0


@dataclass(frozen=True)
class UnknownMap:
    index: Dict[Node, int]
    nodes: Tuple[Node, ...]  # nodes[p] is the mesh node carried by unknown p
    eliminated: Dict[Node, Elimination]
    m: int
    n: int
    q: int
    r: int

    @property
    def N(self) -> int:
        return len(self.nodes)


def index_unknowns(problem: Problem, mesh: Mesh) -> UnknownMap:
    m, n = problem.m, mesh.n
    eliminated: Dict[Node, Elimination] = {}
    r = 0
    if problem.bc_left.is_dirichlet:
        bc = problem.bc_left
        eliminated[(0, 0)] = Elimination("dirichlet", value=bc.c / bc.a)
        r += 1
    if problem.bc_right.is_dirichlet:
        bc = problem.bc_right
        eliminated[(m - 1, n)] = Elimination("dirichlet", value=bc.c / bc.a)
        r += 1
    q = 0
    for i, spec in enumerate(problem.interfaces):
        if spec.kind != "GI":
            continue
        q += 1
        if spec.theta >= 1:
            eliminated[(i + 1, 0)] = Elimination("gi-right", source=(i, n), factor=1.0 / spec.theta)
        else:
            eliminated[(i, n)] = Elimination("gi-left", source=(i + 1, 0), factor=spec.theta)
    nodes = tuple((i, j) for i in range(m) for j in range(n + 1) if (i, j) not in eliminated)
    index = {node: p for p, node in enumerate(nodes)}
    return UnknownMap(index, nodes, eliminated, m, n, q, r)


@dataclass(frozen=True)
class SemiDiscreteSystem:
    """``du/dt = A u + b`` together with the finite volume equation behind
    each row."""

    A: TriDiag
    b: np.ndarray
    row_kind: Tuple[str, ...]
    row_layer: Tuple[int, ...]

    @property
    def N(self) -> int:
        return self.A.n


class _Row:
    def __init__(self, umap: UnknownMap):
        self.umap = umap
        self.coef: Dict[int, float] = {}
        self.const = 0.0
        self.touched: List[str] = []

    def add(self, node: Node, c: float):
        elim = self.umap.eliminated.get(node)
        if elim is None:
            p = self.umap.index[node]
            self.coef[p] = self.coef.get(p, 0.0) + c
        elif elim.source is None:
            self.const += c * elim.value
            self.touched.append("dirichlet-adjacent")
        else:
            self.add(elim.source, c * elim.factor)
            self.touched.append("GI-adjacent")


def _interior_row(row: _Row, i: int, j: int, D: float, h: float):
    k = D / h ** 2
    row.add((i, j - 1), k)
    row.add((i, j), -2 * k)
    row.add((i, j + 1), k)


def assemble(problem: Problem, mesh: Mesh, umap: UnknownMap) -> SemiDiscreteSystem:
    """Build ``(A, b)`` row by row from the finite volume equations."""
    m, n = problem.m, mesh.n
    layers = problem.layers
    N = umap.N
    sub = np.zeros(max(N - 1, 0))
    diag = np.zeros(N)
    sup = np.zeros(max(N - 1, 0))
    b = np.zeros(N)
    kinds = []
    row_layer = []

    for p, (i, j) in enumerate(umap.nodes):
        row = _Row(umap)
        D, g, h = layers[i].diffusivity, layers[i].conductivity, mesh.h[i]
        if 0 < j < n:
            _interior_row(row, i, j, D, h)
            kind = "+".join(dict.fromkeys(row.touched)) or "interior"
        elif j == 0 and i == 0:
            bc = problem.bc_left
            row.add((0, 0), -2 * D / h * (1 / h + bc.a / bc.b))
            row.add((0, 1), 2 * D / h ** 2)
            row.const += 2 * D * bc.c / (h * bc.b)
            kind = "left-boundary"
        elif j == n and i == m - 1:
            bc = problem.bc_right
            row.add((i, n - 1), 2 * D / h ** 2)
            row.add((i, n), -2 * D / h * (1 / h + bc.a / bc.b))
            row.const += 2 * D * bc.c / (h * bc.b)
            kind = "right-boundary"
        else:
            # interface node; k is the interface between layers k and k+1
            k = i if j == n else i - 1
            spec = problem.interfaces[k]
            L, R = layers[k], layers[k + 1]
            DL, DR, gL, gR = L.diffusivity, R.diffusivity, L.conductivity, R.conductivity
            hL, hR = mesh.h[k], mesh.h[k + 1]
            th = spec.theta
            if spec.kind == "GI":
                denom = gL * hL * th * DR + gR * hR * DL
                if th >= 1:
                    w = 2 * DL * DR * th / denom
                    row.add((k, n - 1), w * gL / hL)
                    row.add((k, n), -w * (gL / hL + gR / (th * hR)))
                    row.add((k + 1, 1), w * gR / hR)
                else:
                    w = 2 * DL * DR / denom
                    row.add((k, n - 1), w * gL / hL)
                    row.add((k + 1, 0), -w * (th * gL / hL + gR / hR))
                    row.add((k + 1, 1), w * gR / hR)
                kind = "GI-interface"
            else:
                H = spec.transfer
                if j == n:
                    w = 2 * DL / (gL * hL)
                    row.add((k, n - 1), w * gL / hL)
                    row.add((k, n), -w * (H + gL / hL))
                    row.add((k + 1, 0), w * th * H)
                    kind = "GII-left"
                else:
                    w = 2 * DR / (gR * hR)
                    row.add((k, n), w * H)
                    row.add((k + 1, 0), -w * (th * H + gR / hR))
                    row.add((k + 1, 1), w * gR / hR)
                    kind = "GII-right"
        for col, val in row.coef.items():
            if col == p:
                diag[p] += val
            elif col == p - 1:
                sub[p - 1] += val
            elif col == p + 1:
                sup[p] += val
            else:  # pragma: no cover - structural guarantee of the ordering
                raise AssertionError(f"row {p} couples to non-neighbour column {col}")
        b[p] = row.const
        kinds.append(kind)
        row_layer.append(i)
    return SemiDiscreteSystem(TriDiag(sub, diag, sup), b, tuple(kinds), tuple(row_layer))


def discretise(problem: Problem, n: int):
    """Convenience: ``(mesh, umap, system)`` for ``problem`` at resolution ``n``."""
    mesh = build_mesh(problem, n)
    umap = index_unknowns(problem, mesh)
    return mesh, umap, assemble(problem, mesh, umap)


def reconstruct_full(umap: UnknownMap, u, problem: Problem = None) -> np.ndarray:
    """Values at all ``m(n+1)`` mesh nodes, shape ``(m, n+1)``.

    ``problem`` is accepted for interface symmetry; the elimination rules
    recorded in ``umap`` already carry the boundary data and partition
    coefficients.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (umap.N,):
        raise ValueError(f"expected a vector of length {umap.N}, got shape {u.shape}")
    full = np.empty((umap.m, umap.n + 1))
    for p, (i, j) in enumerate(umap.nodes):
        full[i, j] = u[p]
    for (i, j), elim in umap.eliminated.items():
        if elim.source is None:
            full[i, j] = elim.value
        else:
            full[i, j] = elim.factor * u[umap.index[elim.source]]
    return full


def sample_initial(problem: Problem, mesh: Mesh, umap: UnknownMap) -> np.ndarray:
    """Initial vector ``u0_p = f_i(x_{i,j})`` over the retained nodes; each
    duplicate interface node uses its own layer's initial function."""
    full = np.vstack([layer.sample(mesh.coords[i]) for i, layer in enumerate(problem.layers)])
    return np.array([full[i, j] for (i, j) in umap.nodes])


def full_node_table(mesh: Mesh, values) -> List[Tuple[int, int, float, float]]:
    """Rows ``(layer, j, x, u)`` with 1-based layer numbers."""
    values = np.asarray(values)
    return [
        (i + 1, j, float(mesh.coords[i, j]), float(values[i, j]))
        for i in range(mesh.m)
        for j in range(mesh.n + 1)
    ]
