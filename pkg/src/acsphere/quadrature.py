"""Quadrature rules on the unit sphere and their quality diagnostics.

Rules are points with positive weights under the surface measure
(weights of a rule that integrates constants exactly sum to 4*pi).
Diagnostics: polynomial exactness error, the Marcinkiewicz-Zygmund
constant eta (spectral norm of the discrete Gram minus identity), and
the mesh norm (geodesic radius of the largest hole).
"""

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .harmonics import (
    SURFACE_AREA,
    _point_chunks,
    dim_pn,
    eval_basis,
    validate_points,
)

# Loaded point files may be off unit norm by this much before rejection.
LOAD_NORM_TOL = 1e-6


class QuadratureFileError(ValueError):
    """A point file failed to parse or validate."""


@dataclass
class QuadratureRule:
    """Positive-weight quadrature rule on the sphere.

    Immutable after construction (the cache dict is an internal memo for
    basis matrices and may be filled lazily).
    """

    points: np.ndarray
    weights: np.ndarray
    label: str = ""
    # Known-by-construction exactness degree, None if unknown.
    exactness_hint: int | None = None
    # (z_nodes, z_weights, phis) for product rules; enables separable
    # evaluation.  Points are then ordered z-major.
    grid: tuple | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.points = validate_points(self.points)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.ndim != 1 or len(self.weights) != len(self.points):
            raise ValueError("need one weight per point")
        if (self.weights <= 0).any():
            j = int(np.argmax(self.weights <= 0))
            raise ValueError(f"weight {j} is not positive: {self.weights[j]!r}")

    @property
    def m(self) -> int:
        return len(self.points)

    @property
    def weight_sum(self) -> float:
        return float(self.weights.sum())


@dataclass
class MZReport:
    """Marcinkiewicz-Zygmund constant estimate for one (rule, degree)."""

    eta: float
    N: int
    iterations: int
    converged: bool


def gauss_product_rule(t: int) -> QuadratureRule:
    """Gauss-Legendre x equispaced-longitude product rule.

    ceil((t+1)/2) Gauss-Legendre nodes in z times t+1 longitudes; exact
    for all spherical polynomials of degree <= t.  No point sits on a
    pole (Gauss-Legendre nodes are interior).
    """
    if t < 0:
        raise ValueError(f"exactness degree must be >= 0, got {t}")
    n_z = (t + 2) // 2
    n_phi = t + 1
    zs, zw = np.polynomial.legendre.leggauss(n_z)
    phis = 2.0 * np.pi * np.arange(n_phi) / n_phi
    s = np.sqrt(1.0 - zs * zs)
    x = np.outer(s, np.cos(phis)).ravel()
    y = np.outer(s, np.sin(phis)).ravel()
    z = np.repeat(zs, n_phi)
    points = np.stack([x, y, z], axis=1)
    weights = np.repeat(zw, n_phi) * (2.0 * np.pi / n_phi)
    return QuadratureRule(
        points,
        weights,
        label=f"gauss(t={t})",
        exactness_hint=t,
        grid=(zs, zw, phis),
    )


def random_rule(m: int, seed: int) -> QuadratureRule:
    """Equal-weight rule on m i.i.d. uniform points.

    Generator: numpy PCG64 seeded with `seed`; z ~ U(-1, 1) and
    phi ~ U(0, 2*pi) drawn as two length-m blocks in that order.  Draws
    with |z| >= 1 - 1e-13 are redrawn (pairwise) so gradients stay
    defined at rule points; this preserves uniformity.  The stream is
    part of the package contract: identical seeds give bitwise-identical
    rules.
    """
    if m < 1:
        raise ValueError(f"need at least one point, got m={m}")
    rng = np.random.Generator(np.random.PCG64(seed))
    z = rng.uniform(-1.0, 1.0, size=m)
    phi = rng.uniform(0.0, 2.0 * np.pi, size=m)
    bad = np.abs(z) >= 1.0 - 1e-13
    while bad.any():
        n_bad = int(bad.sum())
        z[bad] = rng.uniform(-1.0, 1.0, size=n_bad)
        phi[bad] = rng.uniform(0.0, 2.0 * np.pi, size=n_bad)
        bad = np.abs(z) >= 1.0 - 1e-13
    s = np.sqrt(1.0 - z * z)
    points = np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)
    weights = np.full(m, SURFACE_AREA / m)
    return QuadratureRule(
        points, weights, label=f"random(m={m}, seed={seed})", exactness_hint=0
    )


def equal_area_rule(m: int) -> QuadratureRule:
    """Equal-weight points from a simple zonal equal-area construction.

    [-1, 1] is split into ceil(sqrt(m*pi)/2) bands of equal area (equal
    z-extent), points are distributed over bands proportionally and
    equispaced in longitude with a golden-angle phase offset per band.
    Deterministic; no pole points.
    """
    if m < 1:
        raise ValueError(f"need at least one point, got m={m}")
    n_bands = max(1, math.ceil(math.sqrt(m * math.pi) / 2.0))
    golden = math.pi * (3.0 - math.sqrt(5.0))
    xs, ys, zs = [], [], []
    prev = 0
    for i in range(n_bands):
        cum = round(m * (i + 1) / n_bands)
        count = cum - prev
        prev = cum
        if count == 0:
            continue
        z = 1.0 - (2.0 * i + 1.0) / n_bands
        s = math.sqrt(1.0 - z * z)
        offset = (i * golden) % (2.0 * math.pi)
        phi = offset + 2.0 * np.pi * np.arange(count) / count
        xs.append(s * np.cos(phi))
        ys.append(s * np.sin(phi))
        zs.append(np.full(count, z))
    points = np.stack(
        [np.concatenate(xs), np.concatenate(ys), np.concatenate(zs)], axis=1
    )
    weights = np.full(m, SURFACE_AREA / m)
    return QuadratureRule(
        points, weights, label=f"equal-area(m={m})", exactness_hint=0
    )


def load_rule(path) -> QuadratureRule:
    """Read a whitespace-separated point file.

    Lines hold "x y z" or "x y z w"; lines starting with '#' and blank
    lines are ignored.  Three-column files get equal weights 4*pi/m.
    Points within 1e-6 of unit norm are renormalized, others rejected.
    """
    rows = []
    ncols = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) not in (3, 4):
                raise QuadratureFileError(
                    f"{path}:{lineno}: expected 3 or 4 fields, got {len(parts)}"
                )
            if ncols is None:
                ncols = len(parts)
            elif len(parts) != ncols:
                raise QuadratureFileError(
                    f"{path}:{lineno}: inconsistent column count "
                    f"({len(parts)} vs {ncols})"
                )
            try:
                vals = [float(p) for p in parts]
            except ValueError as exc:
                raise QuadratureFileError(
                    f"{path}:{lineno}: not a number: {exc}"
                ) from None
            nrm = math.sqrt(vals[0] ** 2 + vals[1] ** 2 + vals[2] ** 2)
            if abs(nrm - 1.0) > LOAD_NORM_TOL:
                raise QuadratureFileError(
                    f"{path}:{lineno}: point norm {nrm!r} is not within "
                    f"{LOAD_NORM_TOL} of 1"
                )
            if ncols == 4 and vals[3] <= 0:
                raise QuadratureFileError(
                    f"{path}:{lineno}: weight must be positive, got {vals[3]!r}"
                )
            rows.append((vals[0] / nrm, vals[1] / nrm, vals[2] / nrm)
                        + ((vals[3],) if ncols == 4 else ()))
    if not rows:
        raise QuadratureFileError(f"{path}: no points found")
    arr = np.asarray(rows, dtype=float)
    points = arr[:, :3]
    if ncols == 4:
        weights = arr[:, 3]
    else:
        weights = np.full(len(rows), SURFACE_AREA / len(rows))
    return QuadratureRule(
        points, weights, label=f"file({os.path.basename(str(path))}, m={len(rows)})"
    )


def gram_matrix(rule: QuadratureRule, N: int) -> np.ndarray:
    """Discrete Gram matrix G = A^T diag(w) A of the degree-N basis under
    the rule's discrete inner product; equals the identity iff the rule
    is 2N-exact."""
    D = dim_pn(N)
    G = np.zeros((D, D))
    for lo, hi in _point_chunks(rule.m, D):
        A = eval_basis(rule.points[lo:hi], N)
        G += A.T @ (rule.weights[lo:hi, None] * A)
    return 0.5 * (G + G.T)


def mz_constant(
    rule: QuadratureRule, N: int, tol: float = 1e-10, max_iter: int = 10000
) -> MZReport:
    """Tightest Marcinkiewicz-Zygmund constant of the rule at degree N.

    eta is the spectral norm of G - I: by the quadratic-form identity
    sum_j w_j chi(x_j)^2 - int chi^2 = c^T (G - I) c with int chi^2 =
    c^T c, it is the smallest constant bounding the relative quadrature
    error of chi^2 over all chi of degree <= N.  Estimated by power
    iteration on (G - I), applied twice per iteration so the iteration
    is on the PSD square and converges monotonically to the norm.
    """
    if N < 0:
        raise ValueError(f"degree must be >= 0, got {N}")
    B = gram_matrix(rule, N)
    B[np.diag_indices_from(B)] -= 1.0
    rng = np.random.Generator(np.random.PCG64(0))
    v = rng.standard_normal(B.shape[0])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for it in range(1, max_iter + 1):
        w = B @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return MZReport(eta=0.0, N=N, iterations=it, converged=True)
        sigma_new = nw
        u = B @ w
        nu = np.linalg.norm(u)
        if nu == 0.0:
            return MZReport(eta=float(nw), N=N, iterations=it, converged=True)
        v = u / nu
        if abs(sigma_new - sigma) <= tol * max(1.0, sigma_new):
            return MZReport(eta=float(sigma_new), N=N, iterations=it, converged=True)
        sigma = sigma_new
    return MZReport(eta=float(sigma), N=N, iterations=max_iter, converged=False)


def exactness_error(rule: QuadratureRule, t: int) -> float:
    """Largest error in integrating a single basis function of degree <= t.

    True integrals are sqrt(4*pi) for the constant and 0 for all higher
    degrees; a rule "has exactness degree t" when this is <= 1e-10
    (1e-8 for published point files).
    """
    if t < 0:
        raise ValueError(f"degree must be >= 0, got {t}")
    D = dim_pn(t)
    acc = np.zeros(D)
    for lo, hi in _point_chunks(rule.m, D):
        A = eval_basis(rule.points[lo:hi], t)
        acc += A.T @ rule.weights[lo:hi]
    acc[0] -= math.sqrt(SURFACE_AREA)
    return float(np.abs(acc).max())


def mesh_norm(rule: QuadratureRule, resolution: int = 64) -> float:
    """Geodesic radius of the largest hole, estimated on an equiangular
    probe grid of resolution x 2*resolution points (poles included).

    Monotone non-decreasing in resolution up to the true mesh norm; the
    estimate is within about 2*pi/resolution of it.
    """
    if resolution < 16:
        raise ValueError(f"resolution must be >= 16, got {resolution}")
    if rule.m == 0:
        raise ValueError("rule has no points")
    thetas = np.pi * np.arange(resolution) / (resolution - 1)
    phis = 2.0 * np.pi * np.arange(2 * resolution) / (2 * resolution)
    st, ct = np.sin(thetas), np.cos(thetas)
    cp, sp = np.cos(phis), np.sin(phis)
    probes = np.stack(
        [
            np.outer(st, cp).ravel(),
            np.outer(st, sp).ravel(),
            np.repeat(ct, len(phis)),
        ],
        axis=1,
    )
    worst = 0.0
    # bound the probes x points distance matrix to ~4M entries per block
    step = max(1, 4_000_000 // rule.m)
    for lo in range(0, len(probes), step):
        dots = probes[lo : lo + step] @ rule.points.T
        best = np.clip(dots.max(axis=1), -1.0, 1.0)
        worst = max(worst, float(np.arccos(best).max()))
    return worst
