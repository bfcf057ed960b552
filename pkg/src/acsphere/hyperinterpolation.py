"""Discrete inner product and the hyperinterpolation projector.

Hyperinterpolation replaces the L2 Fourier coefficients of a sampled
function with quadrature sums: c_flat = sum_j w_j f(x_j) Y_flat(x_j).
With a 2N-exact rule this is the orthogonal projection onto degree-N
polynomials restricted to point data; with weaker rules its quality is
governed by the rule's Marcinkiewicz-Zygmund constant.
"""

import math
from dataclasses import dataclass

import numpy as np

from .harmonics import _point_chunks, dim_pn, eval_basis
from .quadrature import QuadratureRule


@dataclass
class HarmonicCoefficients:
    """A spherical polynomial of degree <= N in flat coefficient order.

    The basis is orthonormal, so the L2 norm of the polynomial equals the
    Euclidean norm of `values`.
    """

    N: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        D = dim_pn(self.N)
        if self.values.shape != (D,):
            raise ValueError(
                f"expected {D} coefficients for degree {self.N}, "
                f"got shape {self.values.shape}"
            )

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def copy(self) -> "HarmonicCoefficients":
        return HarmonicCoefficients(self.N, self.values.copy())


def discrete_inner(rule: QuadratureRule, v, z) -> float:
    """Quadrature version of the L2 inner product: sum_j w_j v_j z_j."""
    v = np.asarray(v, dtype=float)
    z = np.asarray(z, dtype=float)
    if v.shape != (rule.m,) or z.shape != (rule.m,):
        raise ValueError(
            f"values must match the rule's {rule.m} points, "
            f"got {v.shape} and {z.shape}"
        )
    # w . (v*z) rather than (w*v) . z so the product is bitwise symmetric
    return float(np.dot(rule.weights, v * z))


def hyperinterpolate(
    rule: QuadratureRule, f_values, N: int
) -> HarmonicCoefficients:
    """Project point samples onto degree-N coefficients by quadrature.

    One pass of A^T (w * f) over the basis matrix, chunked over points so
    arbitrarily large sample sets never materialize the full matrix.
    """
    f_values = np.asarray(f_values, dtype=float)
    if f_values.shape != (rule.m,):
        raise ValueError(
            f"need one sample per rule point ({rule.m}), got {f_values.shape}"
        )
    D = dim_pn(N)
    wf = rule.weights * f_values
    coeffs = np.zeros(D)
    for lo, hi in _point_chunks(rule.m, D):
        coeffs += eval_basis(rule.points[lo:hi], N).T @ wf[lo:hi]
    return HarmonicCoefficients(N, coeffs)


def uniform_norm_bound(N: int, eta: float, d: int = 3) -> float:
    """Uniform operator-norm bound sqrt(1 + eta) * sqrt(dim P_N) for the
    hyperinterpolation operator built from a rule with MZ constant eta."""
    if eta < 0:
        raise ValueError(f"eta must be >= 0, got {eta}")
    return math.sqrt(1.0 + eta) * math.sqrt(dim_pn(N, d))
