import math

import numpy as np
import pytest

from layerdiff.problem import BoundarySpec, Layer, build_problem

SUITE_SIZE = 240
SUITE_SEED = 20240611


def _boundary(rng, kind):
    if kind == "dirichlet":
        return BoundarySpec(1.0, 0.0, float(rng.uniform(-2, 2)))
    if kind == "neumann":
        return BoundarySpec(0.0, 1.0, float(rng.uniform(-1, 1)))
    return BoundarySpec(float(rng.uniform(0.2, 3)), float(rng.uniform(0.2, 3)), float(rng.uniform(-2, 2)))


def random_problem(rng, m=None, bc=None):
    """Random valid problem: 1-4 layers, mixed interface types and boundaries.

    Conductivities are drawn per layer first so adjacent interfaces never
    make conflicting demands; types I, II and IV are offered only where the
    conductivity equals the diffusivity on both sides.
    """
    m = int(rng.integers(1, 5)) if m is None else m
    widths = rng.uniform(0.2, 1.5, m)
    edges = np.concatenate([[0.0], np.cumsum(widths)])
    D = 10.0 ** rng.uniform(-2, 1, m)
    gamma = np.where(rng.random(m) < 0.75, D, 10.0 ** rng.uniform(-3, 1, m))
    layers = [Layer(float(edges[i]), float(edges[i + 1]), float(D[i]), float(gamma[i])) for i in range(m)]
    interfaces = []
    for k in range(m - 1):
        kinds = ["III", "GI", "GII"]
        if gamma[k] == D[k] and gamma[k + 1] == D[k + 1]:
            kinds += ["I", "II", "IV"]
        kind = kinds[rng.integers(len(kinds))]
        theta = float(rng.choice([rng.uniform(0.3, 0.95), 1.0, rng.uniform(1.05, 3.0)]))
        H = float(10.0 ** rng.uniform(-1, 2))
        item = {"kind": kind}
        if kind == "III":
            item["gamma"] = (float(gamma[k]), float(gamma[k + 1]))
        elif kind in ("II", "GII"):
            item["H"] = H
        if kind in ("IV", "GI", "GII"):
            item["theta"] = theta
        interfaces.append(item)
    if bc is None:
        kinds = ["dirichlet", "neumann", "robin"]
        left = kinds[rng.integers(3)]
        right = kinds[rng.integers(3)]
        if left == right == "neumann":
            right = "dirichlet"
    else:
        left, right = bc
    return build_problem(layers, _boundary(rng, left), _boundary(rng, right), interfaces)


def random_suite(size=SUITE_SIZE, seed=SUITE_SEED):
    rng = np.random.default_rng(seed)
    return [(random_problem(rng), int(rng.integers(4, 33))) for _ in range(size)]


@pytest.fixture(scope="session")
def suite():
    return random_suite()


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.format_results():
        terminalreporter.write_line(line)
