"""Explicit o-minimal cell representations.

Two kinds of cell decompositions are supported:

* :class:`GridComplex` / :class:`GridRegion` -- a bounding box cut by
  per-axis breakpoints into open cells. A cell is addressed by a tuple of
  per-axis *parity indices*: an even index ``2j`` stands for the breakpoint
  ``b[j]``, an odd index ``2j+1`` for the open interval ``(b[j], b[j+1])``.
  Regions are boolean masks over the cell array.
* :class:`SimplicialSet` -- a finite set of pairwise disjoint open
  simplices embedded in R^n.

The Euler characteristic is the alternating count of open cells.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.optimize import linprog

from .geometry import FEAS_TOL, AffineFlat, InvalidDimensionError, orthogonal_complement

__all__ = [
    "GridComplex",
    "GridRegion",
    "SimplicialSet",
    "Refinement",
    "DegenerateSliceError",
    "euler_characteristic",
    "closure",
    "refine_common",
    "region_boolean",
    "slice_chi",
    "slice_pieces",
    "cell_groups",
]

DISJOINTNESS_CHECK_LIMIT = 1000


class DegenerateSliceError(RuntimeError):
    """A flat passes within tolerance of a cell boundary; resample it."""


# --------------------------------------------------------------------------
# grid complexes


@dataclass(frozen=True, eq=False)
class GridComplex:
    breakpoints: tuple

    def __post_init__(self):
        axes = []
        for b in self.breakpoints:
            b = np.array(b, dtype=float).reshape(-1)
            if b.size < 2:
                raise ValueError("each axis needs at least two breakpoints")
            if not np.all(np.diff(b) > 0):
                raise ValueError("breakpoints must be strictly increasing")
            b.setflags(write=False)
            axes.append(b)
        if not axes:
            raise ValueError("a grid complex needs at least one axis")
        object.__setattr__(self, "breakpoints", tuple(axes))

    @classmethod
    def box(cls, lower, upper) -> "GridComplex":
        return cls(tuple((lo, hi) for lo, hi in zip(lower, upper)))

    @property
    def n(self) -> int:
        return len(self.breakpoints)

    @property
    def shape(self) -> tuple:
        return tuple(2 * b.size - 1 for b in self.breakpoints)

    def same_as(self, other: "GridComplex") -> bool:
        return self.n == other.n and all(
            a.shape == b.shape and np.array_equal(a, b)
            for a, b in zip(self.breakpoints, other.breakpoints)
        )

    def cell_dims(self) -> np.ndarray:
        """Array (of the cell-array shape) holding each cell's dimension."""
        dims = np.zeros(self.shape, dtype=int)
        for axis, size in enumerate(self.shape):
            odd = (np.arange(size) % 2).reshape([-1 if a == axis else 1 for a in range(self.n)])
            dims = dims + odd
        return dims

    def axis_lengths(self, axis: int) -> np.ndarray:
        """Per parity index: interval length for odd indices, 0 for breakpoints."""
        b = self.breakpoints[axis]
        out = np.zeros(2 * b.size - 1)
        out[1::2] = np.diff(b)
        return out

    def cell_volumes(self) -> np.ndarray:
        vol = np.ones(self.shape)
        for axis in range(self.n):
            lengths = self.axis_lengths(axis)
            lengths[::2] = 0.0
            vol = vol * lengths.reshape([-1 if a == axis else 1 for a in range(self.n)])
        return vol

    def cell_corners(self, cell) -> np.ndarray:
        """Corner points (2^dim, n) of the closure of a cell."""
        per_axis = []
        for axis, p in enumerate(cell):
            b = self.breakpoints[axis]
            j = p // 2
            per_axis.append((b[j],) if p % 2 == 0 else (b[j], b[j + 1]))
        return np.array(list(itertools.product(*per_axis)), dtype=float)

    def translated(self, shift) -> "GridComplex":
        return GridComplex(tuple(b + s for b, s in zip(self.breakpoints, shift)))

    def scaled(self, factor: float) -> "GridComplex":
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return GridComplex(tuple(b * factor for b in self.breakpoints))


@dataclass(frozen=True, eq=False)
class GridRegion:
    """A finite union of open cells of a :class:`GridComplex`."""

    complex: GridComplex
    mask: np.ndarray

    def __post_init__(self):
        mask = np.array(self.mask, dtype=bool)
        if mask.shape != self.complex.shape:
            raise ValueError(f"mask shape {mask.shape} != cell array shape {self.complex.shape}")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def from_cells(cls, complex: GridComplex, cells: Iterable) -> "GridRegion":
        mask = np.zeros(complex.shape, dtype=bool)
        for cell in cells:
            cell = tuple(int(c) for c in cell)
            if len(cell) != complex.n or any(
                c < 0 or c >= s for c, s in zip(cell, complex.shape)
            ):
                raise ValueError(f"invalid cell identifier {cell}")
            mask[cell] = True
        return cls(complex, mask)

    @classmethod
    def empty(cls, complex: GridComplex) -> "GridRegion":
        return cls(complex, np.zeros(complex.shape, dtype=bool))

    @classmethod
    def full(cls, complex: GridComplex) -> "GridRegion":
        """The closed bounding box of the complex."""
        return cls(complex, np.ones(complex.shape, dtype=bool))

    @classmethod
    def closed_box(cls, lower, upper) -> "GridRegion":
        return cls.full(GridComplex.box(lower, upper))

    @classmethod
    def open_box(cls, lower, upper) -> "GridRegion":
        cx = GridComplex.box(lower, upper)
        return cls.from_cells(cx, [(1,) * cx.n])

    @property
    def n(self) -> int:
        return self.complex.n

    @property
    def cells(self) -> set:
        return {tuple(int(i) for i in c) for c in np.argwhere(self.mask)}

    def __len__(self) -> int:
        return int(self.mask.sum())

    def same_as(self, other: "GridRegion") -> bool:
        if self.complex.same_as(other.complex):
            return bool(np.array_equal(self.mask, other.mask))
        ref = refine_common(self.complex, other.complex)
        return bool(np.array_equal(ref.transfer(self.mask, 0), ref.transfer(other.mask, 1)))

    def max_cell_dim(self) -> int:
        if not self.mask.any():
            return -1
        return int(self.complex.cell_dims()[self.mask].max())

    def translated(self, shift) -> "GridRegion":
        return GridRegion(self.complex.translated(shift), self.mask)

    def scaled(self, factor: float) -> "GridRegion":
        return GridRegion(self.complex.scaled(factor), self.mask)


def closure(region: GridRegion) -> GridRegion:
    """Add every face of every cell of ``region``."""
    m = region.mask.copy()
    for axis in range(region.n):
        m = np.moveaxis(m, axis, 0)
        grown = m.copy()
        # a breakpoint slab is covered by the interval slabs on either side
        grown[:-1:2] |= m[1::2]
        grown[2::2] |= m[1::2]
        m = np.moveaxis(grown, 0, axis)
    return GridRegion(region.complex, m)


@dataclass(frozen=True)
class Refinement:
    """Common refinement of several grid complexes.

    ``sources[i][axis]`` maps each refined parity index along ``axis`` to
    the parity index of the input complex ``i`` containing it, or -1 when
    the refined cell lies outside that complex's bounding box.
    """

    complex: GridComplex
    sources: tuple

    def transfer(self, array: np.ndarray, which: int, fill=0) -> np.ndarray:
        """Pull a per-cell array of input ``which`` back onto the refined cells."""
        src = self.sources[which]
        array = np.asarray(array)
        out = array[np.ix_(*[np.maximum(s, 0) for s in src])]
        outside = np.zeros(self.complex.shape, dtype=bool)
        for axis, s in enumerate(src):
            outside |= (s < 0).reshape([-1 if a == axis else 1 for a in range(len(src))])
        if outside.any():
            out = out.copy()
            out[outside] = fill
        return out

    def cells_of(self, which: int, cell) -> set:
        """Refined cells partitioning ``cell`` of input complex ``which``."""
        per_axis = [np.flatnonzero(s == p) for s, p in zip(self.sources[which], cell)]
        return {tuple(int(i) for i in c) for c in itertools.product(*per_axis)}


def _axis_sources(coarse: np.ndarray, fine: np.ndarray) -> np.ndarray:
    src = np.full(2 * fine.size - 1, -1, dtype=int)
    # breakpoints of the fine axis
    pos = np.searchsorted(coarse, fine)
    exact = (pos < coarse.size) & (coarse[np.minimum(pos, coarse.size - 1)] == fine)
    inside = (fine >= coarse[0]) & (fine <= coarse[-1])
    src[::2] = np.where(exact, 2 * pos, 2 * pos - 1)
    src[::2][~inside] = -1
    # open intervals of the fine axis, located by their midpoints
    mids = 0.5 * (fine[:-1] + fine[1:])
    ipos = np.searchsorted(coarse, mids)
    src[1::2] = np.where((mids > coarse[0]) & (mids < coarse[-1]), 2 * ipos - 1, -1)
    return src


def refine_common(*complexes: GridComplex) -> Refinement:
    """Common refinement: per-axis sorted union of breakpoints."""
    if len({c.n for c in complexes}) != 1:
        raise InvalidDimensionError("complexes have different ambient dimensions")
    n = complexes[0].n
    axes = tuple(
        np.unique(np.concatenate([c.breakpoints[a] for c in complexes])) for a in range(n)
    )
    fine = GridComplex(axes)
    sources = tuple(
        tuple(_axis_sources(c.breakpoints[a], axes[a]) for a in range(n)) for c in complexes
    )
    return Refinement(fine, sources)


def region_boolean(a: GridRegion, b: GridRegion, op: str) -> GridRegion:
    """Union, intersection or difference of two grid regions."""
    if a.complex.same_as(b.complex):
        cx, ma, mb = a.complex, a.mask, b.mask
    else:
        ref = refine_common(a.complex, b.complex)
        cx, ma, mb = ref.complex, ref.transfer(a.mask, 0), ref.transfer(b.mask, 1)
    if op == "union":
        m = ma | mb
    elif op == "intersection":
        m = ma & mb
    elif op == "difference":
        m = ma & ~mb
    else:
        raise ValueError(f"unknown boolean operation {op!r}")
    return GridRegion(cx, m)


# --------------------------------------------------------------------------
# simplicial sets


@dataclass(frozen=True, eq=False)
class SimplicialSet:
    """Pairwise disjoint open simplices given by vertex coordinates and index tuples.

    Disjointness is verified by linear programming when there are at most
    ``DISJOINTNESS_CHECK_LIMIT`` cells and ``check`` is true; above that the
    caller vouches for it.
    """

    vertices: np.ndarray
    cells: tuple
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        verts = np.array(self.vertices, dtype=float)
        if verts.ndim != 2:
            raise ValueError("vertices must be a (V, n) array")
        cells = tuple(tuple(sorted(int(i) for i in c)) for c in self.cells)
        if len(set(cells)) != len(cells):
            raise ValueError("duplicate cells")
        for c in cells:
            if not c or len(set(c)) != len(c):
                raise ValueError(f"bad vertex tuple {c}")
            if c[0] < 0 or c[-1] >= len(verts):
                raise ValueError(f"vertex index out of range in {c}")
            if len(c) - 1 > verts.shape[1]:
                raise ValueError(f"{len(c) - 1}-simplex cannot embed in R^{verts.shape[1]}")
            if len(c) > 1:
                edges = verts[list(c[1:])] - verts[c[0]]
                if np.linalg.matrix_rank(edges, tol=1e-12 * max(1.0, np.abs(edges).max())) < len(c) - 1:
                    raise ValueError(f"vertices of {c} are affinely dependent")
        verts.setflags(write=False)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "cells", cells)
        if self.check and len(cells) <= DISJOINTNESS_CHECK_LIMIT:
            _check_disjoint(verts, cells)

    @classmethod
    def from_simplices(cls, vertices, simplices, check: bool = True) -> "SimplicialSet":
        """Closed simplicial complex: the given simplices together with all their faces."""
        faces = set()
        for s in simplices:
            s = tuple(sorted(int(i) for i in s))
            for r in range(1, len(s) + 1):
                faces.update(itertools.combinations(s, r))
        return cls(vertices, tuple(sorted(faces, key=lambda c: (len(c), c))), check=check)

    @property
    def n(self) -> int:
        return self.vertices.shape[1]

    def dims(self) -> np.ndarray:
        return np.array([len(c) - 1 for c in self.cells], dtype=int)

    def max_cell_dim(self) -> int:
        return int(self.dims().max()) if self.cells else -1

    def by_dim(self) -> dict:
        out: dict = {}
        for c in self.cells:
            out.setdefault(len(c) - 1, []).append(c)
        return {d: np.array(cs, dtype=int) for d, cs in sorted(out.items())}

    def transformed(self, rotation, translation) -> "SimplicialSet":
        """Image under ``x -> rotation @ x + translation``."""
        r = np.asarray(rotation, dtype=float)
        t = np.asarray(translation, dtype=float)
        return SimplicialSet(self.vertices @ r.T + t, self.cells, check=False)


def _open_simplices_meet(p: np.ndarray, q: np.ndarray) -> bool:
    """Do the relative interiors of conv(p) and conv(q) intersect?"""
    # maximise t with lambda_i, mu_j >= t, sum lambda = sum mu = 1, P^T lambda = Q^T mu
    a, b, n = len(p), len(q), p.shape[1]
    nv = a + b + 1
    c = np.zeros(nv)
    c[-1] = -1.0
    a_eq = np.zeros((n + 2, nv))
    a_eq[:n, :a] = p.T
    a_eq[:n, a : a + b] = -q.T
    a_eq[n, :a] = 1.0
    a_eq[n + 1, a : a + b] = 1.0
    b_eq = np.zeros(n + 2)
    b_eq[n:] = 1.0
    a_ub = np.hstack([-np.eye(a + b), np.ones((a + b, 1))])
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=np.zeros(a + b),
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=[(None, None)] * (a + b) + [(None, 1.0)],
        method="highs",
    )
    return res.status == 0 and -res.fun > FEAS_TOL


def _check_disjoint(verts: np.ndarray, cells: tuple) -> None:
    lo = np.array([verts[list(c)].min(axis=0) for c in cells]) if cells else None
    hi = np.array([verts[list(c)].max(axis=0) for c in cells]) if cells else None
    sets = [set(c) for c in cells]
    for i in range(len(cells)):
        for j in range(i + 1, len(cells)):
            if np.any(lo[i] > hi[j] + FEAS_TOL) or np.any(lo[j] > hi[i] + FEAS_TOL):
                continue
            # distinct faces of one simplex have disjoint relative interiors
            if _faces_of_common_simplex(verts, sets[i] | sets[j]):
                continue
            if _open_simplices_meet(verts[list(cells[i])], verts[list(cells[j])]):
                raise ValueError(f"open cells {cells[i]} and {cells[j]} intersect")


def _faces_of_common_simplex(verts, union) -> bool:
    union = sorted(union)
    if len(union) == 1:
        return True
    edges = verts[union[1:]] - verts[union[0]]
    return np.linalg.matrix_rank(edges) == len(union) - 1


def euler_characteristic(obj) -> int:
    """Alternating count of open cells of a grid region or simplicial set."""
    if isinstance(obj, GridRegion):
        dims = obj.complex.cell_dims()[obj.mask]
        return int(np.sum(1 - 2 * (dims % 2)))
    if isinstance(obj, SimplicialSet):
        return int(np.sum(1 - 2 * (obj.dims() % 2)))
    raise TypeError(f"cannot take the Euler characteristic of {type(obj).__name__}")


# --------------------------------------------------------------------------
# convex cells as vertex lists, and slicing by affine flats


def cell_groups(obj) -> list:
    """Group the open cells of ``obj`` as ``(dim, vertices (C, m, n), index)``.

    Every cell is an open convex polytope: the relative interior of the hull
    of its listed vertices. ``index`` holds the vertex indices for simplicial
    sets (needed to look up PL values) and ``None`` for grid regions.
    """
    groups = []
    if isinstance(obj, SimplicialSet):
        for d, idx in obj.by_dim().items():
            groups.append((d, obj.vertices[idx], idx))
    elif isinstance(obj, GridRegion):
        cx = obj.complex
        dims = cx.cell_dims()
        for d in range(cx.n + 1):
            cells = np.argwhere(obj.mask & (dims == d))
            if len(cells):
                groups.append((d, np.stack([cx.cell_corners(tuple(c)) for c in cells]), None))
    else:
        raise TypeError(f"unsupported cell container {type(obj).__name__}")
    return groups


def slice_pieces(normals: np.ndarray, coords: np.ndarray, verts: np.ndarray, values=None):
    """Intersect open convex cells with a batch of affine flats.

    Parameters
    ----------
    normals : (B, k, n) orthonormal bases of the flats' orthogonal complements.
    coords : (B, k) flat positions, i.e. the flat is ``{x : W x = y}``.
    verts : (C, m, n) cell vertices.
    values : optional (C, m) vertex values of an affine function per cell.

    Returns
    -------
    margin : (B, C) positive iff the open cell meets the flat; values within
        ``FEAS_TOL`` of zero flag a non-generic flat.
    lo, hi : (B, C) min / max of the affine function over the closed slice
        (NaN where the slice is empty); only when ``values`` is given.
    """
    b, k, n = normals.shape
    c, m, _ = verts.shape
    if k == 0:
        margin = np.full((b, c), np.inf)
        if values is None:
            return margin, None, None
        lo = np.broadcast_to(values.min(axis=1), (b, c)).copy()
        hi = np.broadcast_to(values.max(axis=1), (b, c)).copy()
        return margin, lo, hi
    proj = np.einsum("bkn,cmn->bcmk", normals, verts)
    margin = np.full((b, c), -np.inf)
    lo = np.full((b, c), np.inf) if values is not None else None
    hi = np.full((b, c), -np.inf) if values is not None else None
    rhs = np.concatenate([coords, np.ones((b, 1))], axis=1)[:, None, :]
    rhs = np.broadcast_to(rhs, (b, c, k + 1))
    # each vertex of {lambda >= 0, sum lambda = 1, P lambda = y} is supported
    # on k+1 cell vertices, so enumerating (k+1)-subsets finds them all
    for subset in itertools.combinations(range(m), k + 1):
        sub = list(subset)
        a = np.ones((b, c, k + 1, k + 1))
        a[:, :, :k, :] = np.swapaxes(proj[:, :, sub, :], 2, 3)
        det = np.linalg.det(a)
        scale = np.abs(a[:, :, :k, :]).max(axis=(2, 3)) ** k + 1.0
        ok = np.abs(det) > 1e-13 * scale
        a[~ok] = np.eye(k + 1)
        lam = np.linalg.solve(a, rhs[..., None])[..., 0]
        lam_min = np.where(ok, lam.min(axis=2), -np.inf)
        margin = np.maximum(margin, lam_min)
        if values is not None:
            f = np.einsum("bcs,cs->bc", lam, values[:, sub])
            feas = ok & (lam_min >= -FEAS_TOL)
            lo = np.where(feas, np.minimum(lo, f), lo)
            hi = np.where(feas, np.maximum(hi, f), hi)
    if values is not None:
        empty = ~np.isfinite(lo)
        lo[empty] = np.nan
        hi[empty] = np.nan
    return margin, lo, hi


def slice_chi(cellset, flat: AffineFlat) -> int:
    """Euler characteristic of ``cellset`` intersected with an affine flat.

    Only cells of dimension at least the flat's codimension can meet a
    generic flat; each that does contributes an open cell of dimension
    ``dim - codim``. Raises :class:`DegenerateSliceError` when the flat is
    within tolerance of a cell boundary.
    """
    if flat.n != cellset.n:
        raise InvalidDimensionError("flat and set live in different dimensions")
    normal = orthogonal_complement(flat.subspace)
    k = normal.dim
    coords = normal.basis @ flat.offset
    total = 0
    for d, verts, _ in cell_groups(cellset):
        if d < k:
            continue
        margin, _, _ = slice_pieces(normal.basis[None], coords[None], verts)
        if np.any(np.abs(margin) <= FEAS_TOL):
            raise DegenerateSliceError("flat is not in general position")
        total += (-1) ** (d - k) * int(np.sum(margin > 0))
    return total
