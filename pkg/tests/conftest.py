import math
import os

import numpy as np
import pytest

from acsphere import gauss_product_rule, load_rule
from acsphere.harmonics import eval_basis
from acsphere.quadrature import QuadratureRule

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture(scope="session")
def rule30():
    """30-exact product rule; the workhorse 2N-exact rule for N = 15."""
    return gauss_product_rule(30)


@pytest.fixture(scope="session")
def design_rule():
    """Loaded 961-point spherical 30-design (equal weights)."""
    return load_rule(os.path.join(DATA_DIR, "design_t30_m961.txt"))


def design_path():
    return os.path.join(DATA_DIR, "design_t30_m961.txt")


def make_only_n_exact_rule(N: int, scale: float = 0.3, seed: int = 12345):
    """Positive-weight rule with exactness degree exactly N.

    Starts from the 2N-exact product rule and perturbs its weights inside
    the nullspace of the degree-N moment conditions, so every polynomial
    of degree <= N is still integrated exactly while degrees N+1..2N pick
    up genuine quadrature error.  The perturbation is small enough to
    keep all weights positive and the Marcinkiewicz-Zygmund constant
    below one (the rule stays a stable sampling set).
    """
    base = gauss_product_rule(2 * N)
    B = eval_basis(base.points, N)
    rng = np.random.Generator(np.random.PCG64(seed))
    raw = base.weights * rng.standard_normal(base.m) * scale
    coef = np.linalg.solve(B.T @ B, B.T @ raw)
    delta = raw - B @ coef
    weights = base.weights + delta
    assert weights.min() > 0
    return QuadratureRule(
        base.points, weights, label=f"only-{N}-exact(m={base.m})"
    )


@pytest.fixture(scope="session")
def only_n_exact_rule_50():
    return make_only_n_exact_rule(50)


def random_unit_points(rng, n):
    pts = rng.standard_normal((n, 3))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def rotation_matrix(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    K = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + math.sin(angle) * K + (1.0 - math.cos(angle)) * (K @ K)
