"""Intrinsic volumes of grid regions and simplicial sets.

``mu_grid_exact`` is exact on grid regions: an open d-box with edge
lengths l has ``mu_k = (-1)**(d-k) * e_k(l)`` (e_k the elementary
symmetric polynomial) and intrinsic volumes add over the disjoint cells.

``mu_crofton`` (projections onto random k-planes) and ``mu_slice_mc``
(Euler characteristics of random (n-k)-flats) are Monte Carlo estimators
that work for any union of open convex cells. Both average over the Haar
probability measure and are rescaled by a per-(n, k) constant; see
:class:`CroftonConstants`.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import _mc
from .cells import GridComplex, GridRegion, SimplicialSet, cell_groups, euler_characteristic, slice_pieces
from .geometry import FEAS_TOL, hull_measure_batch, sample_subspaces

__all__ = [
    "MCEstimate",
    "CroftonConstants",
    "CalibrationError",
    "UnsupportedDimensionError",
    "mu_grid_exact",
    "mu_grid_polynomial",
    "mu_crofton",
    "mu_slice_mc",
    "calibrate",
    "default_constants",
    "exact_volume",
]

CALIBRATION_ENV = "HADWIGER_CALIBRATION"


class CalibrationError(RuntimeError):
    pass


class UnsupportedDimensionError(ValueError):
    pass


@dataclass(frozen=True)
class MCEstimate:
    value: float
    stderr: float
    samples: int
    seed: int
    constant: float = 1.0
    method: str = "exact"

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")
        if self.samples < 1:
            raise ValueError("samples must be positive")


def _ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def _closed_form(n: int, k: int) -> float:
    return math.comb(n, k) * _ball_volume(n) / (_ball_volume(k) * _ball_volume(n - k))


@dataclass
class CroftonConstants:
    """Normalising constants c[n][k] for the probability-Haar estimators.

    Missing entries fall back to the closed form
    ``binom(n, k) * kappa_n / (kappa_k * kappa_{n-k})`` (kappa_d the volume
    of the unit d-ball), which is exactly what :func:`calibrate` estimates.
    ``source`` records where each stored entry came from.
    """

    table: dict = field(default_factory=dict)
    source: dict = field(default_factory=dict)

    def get(self, n: int, k: int) -> float:
        if k == 0 or k == n:
            return 1.0
        if (n, k) in self.table:
            return self.table[(n, k)]
        return _closed_form(n, k)

    def set(self, n: int, k: int, value: float, source: str) -> None:
        if k == 0 or k == n:
            raise ValueError("c[n][0] and c[n][n] are fixed to 1")
        if not value > 0:
            raise ValueError("constants must be positive")
        self.table[(n, k)] = float(value)
        self.source[(n, k)] = source

    def to_json(self) -> str:
        entries = [
            {"n": n, "k": k, "value": v, "source": self.source.get((n, k), "")}
            for (n, k), v in sorted(self.table.items())
        ]
        return json.dumps({"constants": entries}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "CroftonConstants":
        out = cls()
        for e in json.loads(text)["constants"]:
            out.set(int(e["n"]), int(e["k"]), float(e["value"]), e.get("source", "file"))
        return out

    @classmethod
    def load(cls, path) -> "CroftonConstants":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def default_constants() -> CroftonConstants:
    """Constants from ``$HADWIGER_CALIBRATION`` if set, else the closed form."""
    path = os.environ.get(CALIBRATION_ENV)
    if path:
        return CroftonConstants.load(path)
    return CroftonConstants()


# --------------------------------------------------------------------------
# exact values on grid regions


def mu_grid_polynomial(values_or_region, complex: GridComplex | None = None) -> np.ndarray:
    """Coefficients ``[mu_0, ..., mu_n]`` of ``sum_cells w(cell) mu_k(cell)``.

    Accepts a :class:`GridRegion` (weights = mask) or a per-cell weight
    array together with its complex. Each open cell contributes the
    polynomial ``prod over interval factors of (l t - 1)``, whose t^k
    coefficient is ``(-1)**(d-k) e_k(l)``.
    """
    if isinstance(values_or_region, GridRegion):
        complex = values_or_region.complex
        weights = values_or_region.mask.astype(float)
    else:
        weights = np.asarray(values_or_region, dtype=float)
    n = complex.n
    poly = weights[..., None] * np.eye(1, n + 1)[0]
    for axis in range(n):
        lengths = complex.axis_lengths(axis)
        const = np.where(np.arange(lengths.size) % 2 == 1, -1.0, 1.0)
        # contract the leading axis: new_k = sum_c const_c P_k + len_c P_{k-1}
        a = np.tensordot(const, poly, axes=(0, 0))
        b = np.tensordot(lengths, poly, axes=(0, 0))
        poly = a.copy()
        poly[..., 1:] += b[..., :-1]
    return poly


def mu_grid_exact(region: GridRegion, k: int) -> float:
    """Exact k-th intrinsic volume of a grid region."""
    if not 0 <= k <= region.n:
        raise ValueError(f"k={k} out of range for n={region.n}")
    return float(mu_grid_polynomial(region)[k])


# --------------------------------------------------------------------------
# Monte Carlo estimators


def _check_supported(n: int, k: int) -> None:
    if not 0 <= k <= n:
        raise UnsupportedDimensionError(f"k={k} out of range for n={n}")
    if k > 3 and k != n:
        raise UnsupportedDimensionError(f"projection estimators need k <= 3 or k = n (got n={n}, k={k})")


def _simplex_volume(verts: np.ndarray) -> np.ndarray:
    """Volumes of full-dimensional simplices, verts of shape (C, n+1, n)."""
    d = verts.shape[2]
    e = verts[:, 1:] - verts[:, :1]
    return np.abs(np.linalg.det(e)) / math.factorial(d)


def exact_volume(cellset) -> float:
    """Lebesgue volume of the full-dimensional cells."""
    if isinstance(cellset, GridRegion):
        return float(np.sum(cellset.complex.cell_volumes()[cellset.mask]))
    total = 0.0
    for d, verts, _ in cell_groups(cellset):
        if d == cellset.n:
            total += float(np.sum(_simplex_volume(verts)))
    return total


def _exact_estimate(value: float, seed: int, method: str) -> MCEstimate:
    return MCEstimate(float(value), 0.0, 1, seed, 1.0, method)


def _active_groups(cellset, k: int) -> list:
    return [(d, verts) for d, verts, _ in cell_groups(cellset) if d >= k]


def mu_crofton(
    cellset,
    k: int,
    samples: int = 10_000,
    seed: int = 0,
    threads: int = 1,
    constants: CroftonConstants | None = None,
) -> MCEstimate:
    """Projection (Crofton) estimate of mu_k.

    For each Haar-random k-plane L the integral of the Euler characteristic
    of the fibres of the projection onto L equals the signed sum, over open
    cells of dimension >= k, of the k-volume of the projected cell.
    """
    n = cellset.n
    _check_supported(n, k)
    if k == 0:
        return _exact_estimate(euler_characteristic(cellset), seed, "exact")
    if k == n:
        return _exact_estimate(exact_volume(cellset), seed, "exact")
    if samples < 2:
        raise ValueError("need at least two samples")
    groups = _active_groups(cellset, k)
    if not groups:
        return _exact_estimate(0.0, seed, "exact")
    const = (constants or default_constants()).get(n, k)

    def chunk(rng, count):
        w = sample_subspaces(n, k, count, rng)
        out = np.zeros(count)
        for d, verts in groups:
            c, m, _ = verts.shape
            proj = np.einsum("bkn,cmn->bcmk", w, verts).reshape(count * c, m, k)
            meas = hull_measure_batch(proj).reshape(count, c)
            out += (-1) ** (d - k) * meas.sum(axis=1)
        return out

    vals = _mc.run_chunked(chunk, samples, seed, threads)
    mean, err = _mc.mean_and_stderr(vals)
    return MCEstimate(const * mean, const * err, samples, seed, const, "projection-mc")


def sample_flats(n: int, k: int, count: int, rng, lo_fn):
    """Draw flats of codimension k with offsets uniform in a per-sample window.

    ``lo_fn(normals)`` returns the window ``(lo, hi)`` in normal coordinates,
    each of shape (count, k). Returns ``normals, coords, window_volume``.
    """
    normals = sample_subspaces(n, k, count, rng)
    lo, hi = lo_fn(normals)
    u = rng.random((count, k))
    coords = lo + u * (hi - lo)
    return normals, coords, np.prod(hi - lo, axis=1)


def _window_fn(points: np.ndarray):
    def window(normals):
        proj = np.einsum("bkn,pn->bpk", normals, points)
        return proj.min(axis=1), proj.max(axis=1)

    return window


def run_slices(cellset, k, samples, seed, threads, per_flat):
    """Shared slicing loop.

    ``per_flat(d, margin, lo, hi, group_index)`` returns per-sample
    contributions of one cell group. Flats that pass within tolerance of a
    cell boundary are redrawn from the same chunk stream.
    """
    n = cellset.n
    groups = [(d, verts, idx) for d, verts, idx in cell_groups(cellset) if d >= k]
    points = np.concatenate([v.reshape(-1, n) for _, v, _ in groups])
    window = _window_fn(points)

    def chunk(rng, count):
        out = np.empty(count)
        todo = np.arange(count)
        while todo.size:
            normals, coords, vol = sample_flats(n, k, todo.size, rng, window)
            acc = np.zeros(todo.size)
            bad = np.zeros(todo.size, dtype=bool)
            for gi, (d, verts, idx) in enumerate(groups):
                margin, contrib = per_flat(gi, d, verts, idx, normals, coords)
                bad |= np.any(np.abs(margin) <= FEAS_TOL, axis=1)
                acc += contrib
            out[todo[~bad]] = (vol * acc)[~bad]
            todo = todo[bad]
        return out

    return _mc.run_chunked(chunk, samples, seed, threads)


def mu_slice_mc(
    cellset,
    k: int,
    samples: int = 10_000,
    seed: int = 0,
    threads: int = 1,
    constants: CroftonConstants | None = None,
) -> MCEstimate:
    """Slice estimate of mu_k: Euler characteristics of random (n-k)-flats.

    Offsets are uniform over the bounding window of the projected vertices
    and weighted by the window's k-volume.
    """
    n = cellset.n
    _check_supported(n, k)
    if k == 0:
        return _exact_estimate(euler_characteristic(cellset), seed, "exact")
    if k == n:
        return _exact_estimate(exact_volume(cellset), seed, "exact")
    if samples < 2:
        raise ValueError("need at least two samples")
    if not _active_groups(cellset, k):
        return _exact_estimate(0.0, seed, "exact")
    const = (constants or default_constants()).get(n, k)

    def per_flat(gi, d, verts, idx, normals, coords):
        margin, _, _ = slice_pieces(normals, coords, verts)
        return margin, (-1) ** (d - k) * np.sum(margin > 0, axis=1)

    vals = run_slices(cellset, k, samples, seed, threads, per_flat)
    mean, err = _mc.mean_and_stderr(vals)
    return MCEstimate(const * mean, const * err, samples, seed, const, "slice-mc")


def calibrate(n: int, k: int, samples: int = 20_000, seed: int = 0, threads: int = 1) -> MCEstimate:
    """Estimate c[n][k] so the projection estimator reproduces mu_k of the unit cube.

    The closed unit n-cube has ``mu_k = binom(n, k)``. Raises
    :class:`CalibrationError` when the relative standard error exceeds 1%.
    """
    if not 1 <= k <= n - 1:
        raise ValueError("calibration is only meaningful for 1 <= k <= n-1")
    cube = GridRegion.closed_box([0.0] * n, [1.0] * n)
    raw = mu_crofton(cube, k, samples, seed, threads, CroftonConstants(table={(n, k): 1.0}))
    target = math.comb(n, k)
    value = target / raw.value
    stderr = value * raw.stderr / raw.value
    if stderr > 0.01 * value:
        raise CalibrationError(
            f"calibration of c[{n}][{k}] too noisy: stderr {stderr:.3g} > 1% of {value:.4g}"
        )
    return MCEstimate(value, stderr, samples, seed, 1.0, "calibration")
