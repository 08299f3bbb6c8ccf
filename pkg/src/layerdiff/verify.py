"""Error measurement against a fine-grid reference and grid-refinement studies."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .discretise import Mesh, build_mesh, discretise, sample_initial
from .problem import Problem
from .stepper import Scheme, march, steps_for

FINE_GRID = "fine-grid-oracle"
EXTERNAL = "external-table"


class ZeroReferenceError(ZeroDivisionError):
    """The reference solution vanishes identically, so relative error is undefined."""


@dataclass(frozen=True)
class Reference:
    provider: str
    values: np.ndarray  # (m, n+1) at the query nodes
    t: float
    meta: dict = field(default_factory=dict)

    @classmethod
    def external(cls, values, t: float, source: str = "") -> "Reference":
        return cls(EXTERNAL, np.asarray(values, dtype=float), float(t), {"source": source})


@dataclass(frozen=True)
class ErrorRecord:
    h: float
    n: int
    error: float
    ratio: Optional[float] = None
    provider: str = FINE_GRID


def relative_error(numeric, reference) -> float:
    """``max |u_ref - u_num| / max |u_ref|`` over every node of every layer."""
    if isinstance(reference, Reference):
        reference = reference.values
    numeric = np.asarray(numeric, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if numeric.shape != reference.shape:
        raise ValueError(f"node sets differ: {numeric.shape} vs {reference.shape}")
    scale = np.max(np.abs(reference))
    if scale == 0:
        raise ZeroReferenceError("reference solution is identically zero")
    return float(np.max(np.abs(reference - numeric)) / scale)


def solve_full(problem: Problem, n: int, tau: float, t: float, scheme) -> np.ndarray:
    """Full-node solution at time ``t`` (no divergence cut-off)."""
    mesh, umap, system = discretise(problem, n)
    u0 = sample_initial(problem, mesh, umap)
    result = march(system, u0, tau, t, scheme, (), umap, problem, detect_divergence=False)
    return result.final


def fine_grid_oracle(
    problem: Problem, t: float, query_mesh: Mesh, refine: int = 16, cfl: float = 0.1
) -> Reference:
    """Crank-Nicolson solution on a mesh ``refine`` times finer, read off at
    the query nodes.

    The fine mesh nests the query mesh, so no interpolation is involved.  The
    step is the largest ``t / K`` with ``tau <= cfl * min(h_fine)``.
    """
    if not t > 0:
        raise ValueError(f"oracle time must be positive, got {t}")
    if int(refine) != refine or refine < 1:
        raise ValueError(f"refinement factor must be a positive integer, got {refine}")
    refine = int(refine)
    expected = build_mesh(problem, query_mesh.n)
    if not np.allclose(expected.coords, query_mesh.coords, rtol=0, atol=1e-12):
        raise ValueError("query mesh does not belong to this problem, fine mesh cannot nest it")
    n_fine = refine * query_mesh.n
    h_fine = float(np.min(query_mesh.h)) / refine
    steps = max(1, math.ceil(t / (cfl * h_fine) - 1e-9))
    tau = t / steps
    fine = solve_full(problem, n_fine, tau, tau * steps, Scheme.CRANK_NICOLSON)
    values = fine[:, ::refine]
    return Reference(FINE_GRID, values, float(t), {"n_fine": n_fine, "tau_fine": tau, "steps": steps})


def n_for_spacing(problem: Problem, h: float) -> int:
    """Nodes-per-layer count giving spacing ``h`` in every layer."""
    counts = [layer.width / h for layer in problem.layers]
    n = round(counts[0])
    if any(abs(c - n) > 1e-9 * max(1.0, c) for c in counts):
        raise ValueError(f"spacing {h} does not divide every layer into the same number of cells")
    return int(n)


def convergence_study(
    problem: Problem,
    tau: float,
    h_list: Sequence[float],
    t_eval: float,
    scheme,
    refine: int = 16,
    references: Optional[Dict[int, Reference]] = None,
) -> List[ErrorRecord]:
    """Relative error at ``t_eval`` for each spacing, with successive ratios
    ``error(2h) / error(h)``.

    ``references`` may map ``n`` to a precomputed :class:`Reference`; missing
    entries are filled in with the fine-grid oracle (and stored back, so one
    dict can be shared across schemes).
    """
    h_list = [float(h) for h in h_list]
    for coarse, finer in zip(h_list, h_list[1:]):
        if not math.isclose(coarse / finer, 2.0, rel_tol=1e-9):
            raise ValueError(f"spacings must halve successively, got {coarse} then {finer}")
    steps_for(t_eval, tau)
    if references is None:
        references = {}
    records = []
    prev = None
    for h in h_list:
        n = n_for_spacing(problem, h)
        mesh = build_mesh(problem, n)
        ref = references.get(n)
        if ref is None:
            ref = references[n] = fine_grid_oracle(problem, t_eval, mesh, refine)
        numeric = solve_full(problem, n, tau, t_eval, scheme)
        err = relative_error(numeric, ref)
        ratio = prev / err if prev is not None and err > 0 else None
        records.append(ErrorRecord(h, n, err, ratio, ref.provider))
        prev = err
    return records


def _h_label(h: float) -> str:
    k = math.log2(h)
    return f"2^{int(round(k))}" if abs(k - round(k)) < 1e-12 else f"{h:.6g}"


def format_table(studies: Dict[str, List[ErrorRecord]], title: str = "") -> str:
    """Aligned text table, one ``Error | Ratio`` column pair per study."""
    labels = list(studies)
    hs = [rec.h for rec in studies[labels[0]]]
    head = f"{'Node spacing':>12}" + "".join(f" | {lab:^20}" for lab in labels)
    sub = f"{'':>12}" + "".join(f" | {'Error':>10} {'Ratio':>9}" for _ in labels)
    lines = ([title] if title else []) + [head, sub, "-" * len(head)]
    for row, h in enumerate(hs):
        cells = []
        for lab in labels:
            rec = studies[lab][row]
            ratio = "-" if rec.ratio is None else f"{rec.ratio:.2f}"
            cells.append(f" | {rec.error:>10.2e} {ratio:>9}")
        lines.append(f"{_h_label(h):>12}" + "".join(cells))
    return "\n".join(lines)


def write_csv(path, studies: Dict[str, List[ErrorRecord]]):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["study", "h", "n", "error", "ratio", "reference"])
        for label, records in studies.items():
            for rec in records:
                writer.writerow([
                    label,
                    f"{rec.h:.12g}",
                    rec.n,
                    f"{rec.error:.12g}",
                    "" if rec.ratio is None else f"{rec.ratio:.12g}",
                    rec.provider,
                ])
