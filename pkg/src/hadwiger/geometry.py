"""Low-dimensional linear algebra used by the Crofton estimators.

Haar sampling of linear subspaces, orthogonal projection, convex hull
measures (dimension at most 3) and point-in-hull feasibility.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

__all__ = [
    "FEAS_TOL",
    "GRAM_TOL",
    "Subspace",
    "AffineFlat",
    "sample_subspace",
    "sample_subspaces",
    "orthogonal_complement",
    "project",
    "hull_measure",
    "hull_measure_batch",
    "hull_contains",
    "hull_margin",
    "EmptyInputError",
    "InvalidDimensionError",
]

FEAS_TOL = 1e-9
GRAM_TOL = 1e-12
_RANK_TOL = 1e-10


class InvalidDimensionError(ValueError):
    pass


class EmptyInputError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace of R^n stored as a (d, n) array of orthonormal rows."""

    n: int
    basis: np.ndarray

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=float).reshape(-1, self.n)
        if basis.shape[0] > self.n:
            raise InvalidDimensionError(f"{basis.shape[0]} basis vectors in R^{self.n}")
        gram = basis @ basis.T
        if not np.allclose(gram, np.eye(basis.shape[0]), rtol=0.0, atol=GRAM_TOL):
            raise ValueError("basis is not orthonormal")
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]


@dataclass(frozen=True, eq=False)
class AffineFlat:
    """The affine flat ``subspace + offset`` with ``offset`` orthogonal to it."""

    subspace: Subspace
    offset: np.ndarray

    def __post_init__(self):
        offset = np.asarray(self.offset, dtype=float).reshape(self.subspace.n)
        if np.any(np.abs(self.subspace.basis @ offset) > GRAM_TOL * max(1.0, np.abs(offset).max())):
            raise ValueError("offset is not orthogonal to the flat's direction space")
        offset.setflags(write=False)
        object.__setattr__(self, "offset", offset)

    @property
    def n(self) -> int:
        return self.subspace.n

    @property
    def dim(self) -> int:
        return self.subspace.dim

    @classmethod
    def from_normal_coordinates(cls, normal: Subspace, coords) -> "AffineFlat":
        """Flat ``{x : normal.basis @ x == coords}``."""
        coords = np.asarray(coords, dtype=float).reshape(normal.dim)
        return cls(orthogonal_complement(normal), normal.basis.T @ coords)


def _check_dims(n: int, d: int) -> None:
    if n < 0 or d < 0 or d > n:
        raise InvalidDimensionError(f"cannot take a {d}-dimensional subspace of R^{n}")


def sample_subspaces(n: int, d: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` Haar-distributed d-subspaces of R^n.

    Returns an array of shape ``(count, d, n)`` whose rows are orthonormal.
    Draws whose Gaussian matrix is numerically rank deficient are redrawn
    from the same stream, so the output depends only on the stream state.
    """
    _check_dims(n, d)
    out = np.empty((count, d, n))
    if d == 0 or count == 0:
        return out
    g = rng.standard_normal((count, n, d))
    q, r = np.linalg.qr(g)
    # fix the sign ambiguity of QR so the map Gaussian -> frame is well defined
    signs = np.sign(np.diagonal(r, axis1=1, axis2=2))
    signs[signs == 0] = 1.0
    q = q * signs[:, None, :]
    bad = np.abs(np.diagonal(r, axis1=1, axis2=2)).min(axis=1) < _RANK_TOL
    for i in np.flatnonzero(bad):
        q[i] = sample_subspace(n, d, rng).basis.T
    out[:] = np.swapaxes(q, 1, 2)
    return out


def sample_subspace(n: int, d: int, rng: np.random.Generator) -> Subspace:
    """Draw one rotation-invariant random d-dimensional subspace of R^n."""
    _check_dims(n, d)
    if d == 0:
        return Subspace(n, np.empty((0, n)))
    while True:
        q, r = np.linalg.qr(rng.standard_normal((n, d)))
        diag = np.diagonal(r)
        if np.abs(diag).min() >= _RANK_TOL:
            return Subspace(n, (q * np.where(diag < 0, -1.0, 1.0)).T)


def orthogonal_complement(subspace: Subspace) -> Subspace:
    n, d = subspace.n, subspace.dim
    if d == n:
        return Subspace(n, np.empty((0, n)))
    if d == 0:
        return Subspace(n, np.eye(n))
    # trailing left-singular vectors of the basis span its complement
    u, _, _ = np.linalg.svd(subspace.basis.T, full_matrices=True)
    comp = u[:, d:].T
    # re-orthonormalise to push the Gram error well below GRAM_TOL
    q, _ = np.linalg.qr(comp.T)
    return Subspace(n, q.T)


def project(points, subspace: Subspace) -> np.ndarray:
    """Coordinates of ``points`` (shape (m, n)) in the subspace basis."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != subspace.n:
        raise InvalidDimensionError(
            f"points live in R^{pts.shape[1]}, subspace in R^{subspace.n}"
        )
    return pts @ subspace.basis.T


def _as_point_array(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.size == 0 and (pts.ndim < 2 or pts.shape[0] == 0):
        raise EmptyInputError("empty point list")
    if pts.ndim == 1:
        pts = pts[:, None]
    return pts


def hull_measure(points) -> float:
    """d-dimensional volume of the convex hull of points in R^d, d <= 3.

    For d = 0 the hull of a nonempty set is a point, with measure 1.
    Affinely degenerate inputs have measure 0.
    """
    pts = _as_point_array(points)
    m, d = pts.shape
    if d == 0:
        return 1.0
    if d > 3:
        raise InvalidDimensionError("hull_measure supports d <= 3")
    if d == 1:
        return float(np.ptp(pts[:, 0]))
    if m <= d:
        return 0.0
    centred = pts - pts.mean(axis=0)
    sv = np.linalg.svd(centred, compute_uv=False)
    if sv[-1] <= 1e-12 * max(1.0, sv[0]):
        return 0.0
    try:
        return float(ConvexHull(pts).volume)
    except QhullError:
        return 0.0


def _tri_area(a, b, c):
    u, v = b - a, c - a
    return 0.5 * np.abs(u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0])


def hull_measure_batch(pts: np.ndarray) -> np.ndarray:
    """Vectorised :func:`hull_measure` over a stack of shape (B, m, d)."""
    pts = np.asarray(pts, dtype=float)
    b, m, d = pts.shape
    if d == 0:
        return np.ones(b)
    if d == 1:
        return np.ptp(pts[:, :, 0], axis=1)
    if m <= d:
        return np.zeros(b)
    if d == 2 and m == 3:
        return _tri_area(pts[:, 0], pts[:, 1], pts[:, 2])
    if d == 2 and m == 4:
        # half the sum of the four triangle areas is the hull area of
        # four points in general position (quadrilateral or triangle+point)
        tris = combinations(range(4), 3)
        return 0.5 * sum(_tri_area(pts[:, i], pts[:, j], pts[:, k]) for i, j, k in tris)
    if d == 3 and m == 4:
        e = pts[:, 1:] - pts[:, :1]
        return np.abs(np.linalg.det(e)) / 6.0
    return np.array([hull_measure(p) for p in pts])


def hull_margin(point, points) -> float:
    """Largest t such that ``point`` is a convex combination with all weights >= t.

    Positive margins mean ``point`` is in the relative interior of the
    hull of an affinely independent set (or of some simplex of it);
    negative margins mean it lies outside the closed hull. Returns -inf
    when ``point`` is not even in the affine hull.
    """
    pts = _as_point_array(points)
    x = np.asarray(point, dtype=float).reshape(-1)
    m, d = pts.shape
    if x.shape[0] != d:
        raise InvalidDimensionError(f"point in R^{x.shape[0]}, hull in R^{d}")
    # variables (lambda_1..lambda_m, t); maximise t
    c = np.zeros(m + 1)
    c[-1] = -1.0
    a_eq = np.zeros((d + 1, m + 1))
    a_eq[:d, :m] = pts.T
    a_eq[d, :m] = 1.0
    b_eq = np.append(x, 1.0)
    a_ub = np.hstack([-np.eye(m), np.ones((m, 1))])
    b_ub = np.zeros(m)
    bounds = [(None, None)] * m + [(None, 1.0)]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status == 2:
        return -np.inf
    if res.status != 0:
        raise RuntimeError(f"feasibility LP failed: {res.message}")
    return float(-res.fun)


def hull_contains(point, points, tol: float = FEAS_TOL) -> bool:
    """True iff ``point`` lies in the closed convex hull of ``points`` (within ``tol``)."""
    pts = _as_point_array(points)
    x = np.asarray(point, dtype=float).reshape(-1)
    if x.shape[0] != pts.shape[1]:
        raise InvalidDimensionError(f"point in R^{x.shape[0]}, hull in R^{pts.shape[1]}")
    if pts.shape[1] == 0:
        return True
    # lambda >= 0, sum(lambda) = 1, P lambda + r = x with |r_i| <= tol
    m, d = pts.shape
    a_eq = np.zeros((d + 1, m + d))
    a_eq[:d, :m] = pts.T
    a_eq[:d, m:] = np.eye(d)
    a_eq[d, :m] = 1.0
    b_eq = np.append(x, 1.0)
    bounds = [(0, None)] * m + [(-tol, tol)] * d
    res = linprog(np.zeros(m + d), A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
    return res.status == 0
