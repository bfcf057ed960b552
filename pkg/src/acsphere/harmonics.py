"""Real spherical harmonics on the unit 2-sphere.

The basis is orthonormal with respect to the surface measure (area of the
sphere is 4*pi, no 1/(4*pi) averaging).  Within each degree l the 2l+1
functions are ordered sine terms (orders -l..-1), the zonal term (order 0),
then cosine terms (orders 1..l), so the flat position of (l, k) with
k = 1..2l+1 is l*l + k - 1.  The sign convention of the individual
functions is an internal choice; downstream code only relies on
orthonormality, the zonal column, and rotation-invariant sums.

Associated Legendre values are produced by the fully normalized three-term
recurrence (normalization folded into the coefficients), which stays in
range well beyond degree 200 where the unnormalized recurrence overflows.
"""

import math
from functools import lru_cache
from typing import NamedTuple

import numpy as np

SURFACE_AREA = 4.0 * math.pi

# |x|^2 may deviate from 1 by at most this much.
UNIT_NORM_TOL = 1e-12

# Gradient evaluation rejects points with |z| above 1 - POLE_EXCLUSION:
# the theta/phi chart degenerates at the poles.
POLE_EXCLUSION = 1e-12

_SQRT2 = math.sqrt(2.0)


class PoleError(ValueError):
    """Surface-gradient evaluation was requested too close to a pole."""


class BasisIndex(NamedTuple):
    """Position of one basis function: degree, 1-based index, flat offset."""

    ell: int
    k: int
    flat: int

    @property
    def order(self) -> int:
        """Signed order m in -ell..ell (negative = sine, 0 = zonal)."""
        return self.k - self.ell - 1


def z_dim(d: int, ell: int) -> int:
    """Number of linearly independent spherical harmonics of exact degree
    ell on the sphere embedded in R^d.  Exact integer arithmetic."""
    if d < 3:
        raise ValueError(f"ambient dimension must be >= 3, got {d}")
    if ell < 0:
        raise ValueError(f"degree must be >= 0, got {ell}")
    if ell == 0:
        return 1
    # (2*ell + d - 2) * Gamma(ell + d - 2) / (Gamma(d - 1) * Gamma(ell + 1)),
    # which is integral; Gamma(n) = (n-1)! for integer n.
    num = (2 * ell + d - 2) * math.factorial(ell + d - 3)
    return num // (math.factorial(d - 2) * math.factorial(ell))


def dim_pn(N: int, d: int = 3) -> int:
    """Dimension of the space of spherical polynomials of degree <= N,
    equal to z_dim(d+1, N); (N+1)^2 on the 2-sphere."""
    if N < 0:
        raise ValueError(f"degree must be >= 0, got {N}")
    return z_dim(d + 1, N)


def laplace_eigenvalue(ell: int, d: int = 3) -> float:
    """Eigenvalue l*(l+d-2) of the negative Laplace-Beltrami operator on
    degree-ell harmonics."""
    if ell < 0:
        raise ValueError(f"degree must be >= 0, got {ell}")
    return float(ell * (ell + d - 2))


def basis_index(flat: int) -> BasisIndex:
    """Recover (ell, k) from a flat coefficient position."""
    if flat < 0:
        raise ValueError("flat index must be >= 0")
    ell = math.isqrt(flat)
    return BasisIndex(ell=ell, k=flat - ell * ell + 1, flat=flat)


@lru_cache(maxsize=32)
def degree_index(N: int) -> np.ndarray:
    """Degree l of each flat position, length (N+1)^2."""
    out = np.repeat(np.arange(N + 1), 2 * np.arange(N + 1) + 1)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=32)
def order_index(N: int) -> np.ndarray:
    """Signed order m of each flat position, length (N+1)^2."""
    out = np.concatenate([np.arange(-l, l + 1) for l in range(N + 1)])
    out.setflags(write=False)
    return out


@lru_cache(maxsize=32)
def eigenvalue_vector(N: int) -> np.ndarray:
    """l*(l+1) per flat position; the diagonal of -Laplace-Beltrami."""
    ell = degree_index(N).astype(float)
    out = ell * (ell + 1.0)
    out.setflags(write=False)
    return out


def validate_points(points) -> np.ndarray:
    """Coerce to an (m, 3) float array and require unit norm."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"points must have shape (m, 3), got {pts.shape}")
    nrm2 = np.einsum("ij,ij->i", pts, pts)
    bad = np.abs(nrm2 - 1.0) > UNIT_NORM_TOL
    if bad.any():
        j = int(np.argmax(bad))
        raise ValueError(
            f"point {j} is off the unit sphere (|x|^2 = {nrm2[j]!r})"
        )
    return pts


def _tri(ell: int, m: int) -> int:
    # Column of (ell, m) in the packed 0 <= m <= ell <= N Legendre table.
    return ell * (ell + 1) // 2 + m


@lru_cache(maxsize=32)
def _recurrence_coeffs(N: int):
    a = np.zeros((N + 1, N + 1))
    b = np.zeros((N + 1, N + 1))
    for m in range(N + 1):
        for l in range(m + 2, N + 1):
            a[l, m] = math.sqrt((4 * l * l - 1.0) / (l * l - m * m))
            b[l, m] = -math.sqrt(
                (2 * l + 1.0) * ((l - 1) ** 2 - m * m)
                / ((2 * l - 3.0) * (l * l - m * m))
            )
    a.setflags(write=False)
    b.setflags(write=False)
    return a, b


def _legendre_table(N: int, z: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Fully normalized associated Legendre values at z = cos(theta).

    Returns an (npts, (N+1)(N+2)/2) array; column _tri(l, m) holds the
    m = 0 normalization such that the zonal harmonic is the column itself
    and the order-m harmonics are sqrt(2) * column * cos/sin(m*phi).
    """
    npts = z.shape[0]
    P = np.empty((npts, (N + 1) * (N + 2) // 2))
    P[:, 0] = 1.0 / math.sqrt(SURFACE_AREA)
    if N == 0:
        return P
    a, b = _recurrence_coeffs(N)
    for m in range(1, N + 1):
        P[:, _tri(m, m)] = (
            math.sqrt((2 * m + 1.0) / (2 * m)) * s * P[:, _tri(m - 1, m - 1)]
        )
    for m in range(N):
        P[:, _tri(m + 1, m)] = math.sqrt(2 * m + 3.0) * z * P[:, _tri(m, m)]
    for m in range(N - 1):
        for l in range(m + 2, N + 1):
            P[:, _tri(l, m)] = (
                a[l, m] * z * P[:, _tri(l - 1, m)]
                + b[l, m] * P[:, _tri(l - 2, m)]
            )
    return P


def _legendre_theta_derivative(
    N: int, z: np.ndarray, s: np.ndarray, P: np.ndarray
) -> np.ndarray:
    """d/d(theta) of the normalized Legendre table.  Requires s > 0."""
    dP = np.zeros_like(P)
    inv_s = 1.0 / s
    for m in range(N + 1):
        for l in range(max(m, 1), N + 1):
            acc = l * z * P[:, _tri(l, m)]
            if l - 1 >= m:
                r = math.sqrt((2 * l + 1.0) / (2 * l - 1.0) * (l * l - m * m))
                acc = acc - r * P[:, _tri(l - 1, m)]
            dP[:, _tri(l, m)] = acc * inv_s
    return dP


@lru_cache(maxsize=32)
def _flat_gather(N: int):
    """Index arrays mapping flat basis positions onto the Legendre table
    and onto the trig table (columns N+m for signed order m)."""
    mp = order_index(N)
    ell = degree_index(N)
    tri_cols = np.array([_tri(l, abs(m)) for l, m in zip(ell, mp)])
    trig_cols = N + mp
    tri_cols.setflags(write=False)
    return tri_cols, trig_cols


def _trig_table(N: int, phi: np.ndarray) -> np.ndarray:
    """Columns N+m: sqrt(2)*cos(m*phi) for m>0, 1 for m=0,
    sqrt(2)*sin(|m|*phi) for m<0."""
    T = np.empty((phi.shape[0], 2 * N + 1))
    T[:, N] = 1.0
    for m in range(1, N + 1):
        T[:, N + m] = _SQRT2 * np.cos(m * phi)
        T[:, N - m] = _SQRT2 * np.sin(m * phi)
    return T


def eval_basis(points, N: int) -> np.ndarray:
    """Evaluate all basis functions of degree <= N at unit points.

    Returns the (m, (N+1)^2) matrix with entry (j, flat) = Y_flat(x_j).
    Column 0 is the constant 1/sqrt(4*pi).
    """
    pts = validate_points(points)
    z = pts[:, 2]
    s = np.hypot(pts[:, 0], pts[:, 1])
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    P = _legendre_table(N, z, s)
    T = _trig_table(N, phi)
    tri_cols, trig_cols = _flat_gather(N)
    return P[:, tri_cols] * T[:, trig_cols]


def eval_basis_gradient(points, N: int):
    """Tangential-derivative tables at unit points away from the poles.

    Returns (D_theta, D_phi) where D_theta[j, flat] is the theta-derivative
    of Y_flat at x_j and D_phi[j, flat] is (1/sin theta) * phi-derivative,
    i.e. the e_theta and e_phi components of the surface gradient.
    """
    pts = validate_points(points)
    z = pts[:, 2]
    if (np.abs(z) > 1.0 - POLE_EXCLUSION).any():
        j = int(np.argmax(np.abs(z) > 1.0 - POLE_EXCLUSION))
        raise PoleError(
            f"point {j} has |z| = {abs(z[j])!r}; surface gradients are "
            "not defined at the poles of the theta/phi chart"
        )
    s = np.hypot(pts[:, 0], pts[:, 1])
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    P = _legendre_table(N, z, s)
    dP = _legendre_theta_derivative(N, z, s, P)
    T = _trig_table(N, phi)
    tri_cols, trig_cols = _flat_gather(N)

    d_theta = dP[:, tri_cols] * T[:, trig_cols]

    # (1/sin)*d/dphi swaps each sine/cosine pair and scales by -/+ m.
    mp = order_index(N)
    P_over_s = P / s[:, None]
    swapped = (N - mp).astype(int)  # trig column of the partner function
    factor = np.where(mp > 0, -mp, np.abs(mp)).astype(float)
    d_phi = P_over_s[:, tri_cols] * T[:, swapped] * factor
    return d_theta, d_phi


# Target temporary size (matrix entries) for chunked point loops.
_CHUNK_ENTRIES = 8_000_000


def _point_chunks(m: int, cols: int):
    step = max(1, _CHUNK_ENTRIES // max(cols, 1))
    for lo in range(0, m, step):
        yield lo, min(lo + step, m)


def eval_expansion(coeffs, points) -> np.ndarray:
    """Evaluate sum_flat c_flat * Y_flat at the given unit points.

    `coeffs` is any object with attributes N and values (flat coefficient
    vector of length (N+1)^2).
    """
    pts = validate_points(points)
    values = np.asarray(coeffs.values, dtype=float)
    D = dim_pn(coeffs.N)
    if values.shape != (D,):
        raise ValueError(
            f"coefficient vector has length {values.shape}, expected ({D},)"
        )
    out = np.empty(pts.shape[0])
    for lo, hi in _point_chunks(pts.shape[0], D):
        out[lo:hi] = eval_basis(pts[lo:hi], coeffs.N) @ values
    return out


def eval_surface_gradient(coeffs, points) -> np.ndarray:
    """Surface gradient of the expansion at unit points (poles excluded).

    Returns an (m, 3) array of tangent vectors (each orthogonal to its
    evaluation point).
    """
    pts = validate_points(points)
    values = np.asarray(coeffs.values, dtype=float)
    z = pts[:, 2]
    s = np.hypot(pts[:, 0], pts[:, 1])
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    cphi, sphi = np.cos(phi), np.sin(phi)
    e_theta = np.stack([z * cphi, z * sphi, -s], axis=1)
    e_phi = np.stack([-sphi, cphi, np.zeros_like(phi)], axis=1)
    out = np.empty_like(pts)
    D = dim_pn(coeffs.N)
    for lo, hi in _point_chunks(pts.shape[0], 2 * D):
        d_theta, d_phi = eval_basis_gradient(pts[lo:hi], coeffs.N)
        g_theta = d_theta @ values
        g_phi = d_phi @ values
        out[lo:hi] = (
            g_theta[:, None] * e_theta[lo:hi] + g_phi[:, None] * e_phi[lo:hi]
        )
    return out


def expansion_pole_values(coeffs):
    """Values at the north and south pole; only zonal terms contribute."""
    values = np.asarray(coeffs.values, dtype=float)
    N = coeffs.N
    ells = np.arange(N + 1)
    zonal = values[ells * ells + ells]
    amp = np.sqrt((2 * ells + 1) / SURFACE_AREA)
    north = float(np.dot(zonal, amp))
    south = float(np.dot(zonal, amp * (-1.0) ** ells))
    return north, south


def kernel_value(N: int, x, y) -> float:
    """Reproducing kernel of the degree-N polynomial space: the sum of
    Y_flat(x) * Y_flat(y) over all basis functions of degree <= N."""
    bx = eval_basis(np.reshape(np.asarray(x, dtype=float), (1, 3)), N)
    by = eval_basis(np.reshape(np.asarray(y, dtype=float), (1, 3)), N)
    return float(bx[0] @ by[0])


class GridEvaluator:
    """Separable evaluation of degree-N expansions on a theta x phi grid.

    Exploits the product structure Y = (Legendre in theta) * (trig in phi)
    so evaluating on an n_lat x n_lon grid costs far less than a dense
    basis matrix; used for probe grids, snapshots, and product-rule
    energy terms.
    """

    def __init__(self, N: int, thetas, phis):
        self.N = N
        thetas = np.asarray(thetas, dtype=float)
        phis = np.asarray(phis, dtype=float)
        self.n_lat = thetas.shape[0]
        self.n_lon = phis.shape[0]
        z = np.cos(thetas)
        s = np.sin(thetas)
        self._P = _legendre_table(N, z, s)
        m = np.arange(N + 1)[:, None]
        self._cosT = np.cos(m * phis[None, :])
        self._sinT = np.sin(m * phis[None, :])
        self._cosT[1:] *= _SQRT2
        self._sinT[1:] *= _SQRT2
        self._tri_cols = [
            np.array([_tri(l, mm) for l in range(mm, N + 1)])
            for mm in range(N + 1)
        ]
        ells = [np.arange(mm, N + 1) for mm in range(N + 1)]
        self._flat_plus = [e * e + e + mm for mm, e in enumerate(ells)]
        self._flat_minus = [e * e + e - mm for mm, e in enumerate(ells)]

    def values(self, coeff_values) -> np.ndarray:
        """Grid of expansion values, shape (n_lat, n_lon)."""
        c = np.asarray(coeff_values, dtype=float)
        N = self.N
        A = np.zeros((self.n_lat, N + 1))
        B = np.zeros((self.n_lat, N + 1))
        for m in range(N + 1):
            block = self._P[:, self._tri_cols[m]]
            A[:, m] = block @ c[self._flat_plus[m]]
            if m > 0:
                B[:, m] = block @ c[self._flat_minus[m]]
        return A @ self._cosT + B @ self._sinT
