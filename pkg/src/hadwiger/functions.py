"""Constructible (grid) and piecewise-linear (simplicial) functions.

Both kinds vanish off their domain: a :class:`ConstructibleFunction` is
zero outside its grid's bounding box and a :class:`PLFunction` is zero
off its simplicial set.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .cells import GridComplex, GridRegion, SimplicialSet, refine_common
from .geometry import InvalidDimensionError

__all__ = [
    "ConstructibleFunction",
    "PLFunction",
    "StepFunction",
    "lattice",
    "excursion",
    "pl_excursion_chi",
    "pl_sublevel_chi",
    "pl_cell_ranges",
    "critical_values",
    "cell_step_euler",
]


@dataclass(frozen=True, eq=False)
class ConstructibleFunction:
    """A real value per open cell of a grid complex."""

    complex: GridComplex
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != self.complex.shape:
            raise ValueError(f"values shape {vals.shape} != cell array shape {self.complex.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def indicator(cls, region: GridRegion, r: float = 1.0) -> "ConstructibleFunction":
        return cls(region.complex, np.where(region.mask, float(r), 0.0))

    @classmethod
    def zero(cls, complex: GridComplex) -> "ConstructibleFunction":
        return cls(complex, np.zeros(complex.shape))

    @property
    def n(self) -> int:
        return self.complex.n

    def map(self, fn) -> "ConstructibleFunction":
        """Cellwise composition ``fn(h)``; ``fn`` must fix 0 to keep compact support."""
        return ConstructibleFunction(self.complex, np.asarray(fn(self.values), dtype=float))

    def __neg__(self) -> "ConstructibleFunction":
        return ConstructibleFunction(self.complex, -self.values)

    def __mul__(self, r: float) -> "ConstructibleFunction":
        return ConstructibleFunction(self.complex, float(r) * self.values)

    __rmul__ = __mul__

    def _binary(self, other: "ConstructibleFunction", op) -> "ConstructibleFunction":
        if self.n != other.n:
            raise InvalidDimensionError("functions live in different dimensions")
        if self.complex.same_as(other.complex):
            return ConstructibleFunction(self.complex, op(self.values, other.values))
        ref = refine_common(self.complex, other.complex)
        return ConstructibleFunction(
            ref.complex, op(ref.transfer(self.values, 0), ref.transfer(other.values, 1))
        )

    def __add__(self, other: "ConstructibleFunction") -> "ConstructibleFunction":
        return self._binary(other, np.add)

    def __sub__(self, other: "ConstructibleFunction") -> "ConstructibleFunction":
        return self._binary(other, np.subtract)

    def refined_to(self, complex: GridComplex) -> "ConstructibleFunction":
        ref = refine_common(complex, self.complex)
        if not ref.complex.same_as(complex):
            raise ValueError("target complex does not refine this function's complex")
        return ConstructibleFunction(complex, ref.transfer(self.values, 1))

    def allclose(self, other: "ConstructibleFunction", atol: float = 1e-12) -> bool:
        diff = self - other
        return bool(np.all(np.abs(diff.values) <= atol))

    def translated(self, shift) -> "ConstructibleFunction":
        return ConstructibleFunction(self.complex.translated(shift), self.values)

    def support(self) -> GridRegion:
        return GridRegion(self.complex, self.values != 0)


@dataclass(frozen=True, eq=False)
class PLFunction:
    """Vertex values on a simplicial set, affine on each open simplex."""

    set: SimplicialSet
    vertex_values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.vertex_values, dtype=float).reshape(-1)
        if vals.size != len(self.set.vertices):
            raise ValueError(
                f"{vals.size} vertex values for {len(self.set.vertices)} vertices"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("vertex values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "vertex_values", vals)

    @property
    def n(self) -> int:
        return self.set.n

    def __neg__(self) -> "PLFunction":
        return PLFunction(self.set, -self.vertex_values)

    def __mul__(self, r: float) -> "PLFunction":
        return PLFunction(self.set, float(r) * self.vertex_values)

    __rmul__ = __mul__

    def transformed(self, rotation, translation) -> "PLFunction":
        """``h o g^-1`` for the rigid motion ``g(x) = rotation @ x + translation``."""
        return PLFunction(self.set.transformed(rotation, translation), self.vertex_values)

    def max_abs(self) -> float:
        used = sorted({i for c in self.set.cells for i in c})
        return float(np.abs(self.vertex_values[used]).max()) if used else 0.0


# --------------------------------------------------------------------------
# lattice operations and excursion sets


def lattice(f: ConstructibleFunction, g: ConstructibleFunction, op: str) -> ConstructibleFunction:
    """Pointwise max (``"max"``) or min (``"min"``) on the common refinement."""
    if op == "max":
        return f._binary(g, np.maximum)
    if op == "min":
        return f._binary(g, np.minimum)
    raise ValueError(f"unknown lattice operation {op!r}")


_MODES = {
    "geq": lambda v, s: v >= s,
    "gt": lambda v, s: v > s,
    "lt_neg": lambda v, s: v < -s,
    "leq_neg": lambda v, s: v <= -s,
}


def excursion(h: ConstructibleFunction, s: float, mode: str = "geq") -> GridRegion:
    """Cells where ``h >= s``, ``h > s``, ``h < -s`` or ``h <= -s``.

    When the chosen threshold admits the value 0, the true excursion set
    contains the unbounded zero region outside the bounding box; the result
    is clipped to the box and a warning is issued.
    """
    try:
        test = _MODES[mode]
    except KeyError:
        raise ValueError(f"unknown excursion mode {mode!r}") from None
    if test(0.0, s):
        warnings.warn(
            f"excursion {mode} at s={s} contains the zero set; clipped to the bounding box",
            stacklevel=2,
        )
    return GridRegion(h.complex, test(h.values, s))


def pl_cell_ranges(h: PLFunction):
    """Per open simplex: dimension, closure-min and closure-max of ``h``."""
    dims = h.set.dims()
    lo = np.array([h.vertex_values[list(c)].min() for c in h.set.cells])
    hi = np.array([h.vertex_values[list(c)].max() for c in h.set.cells])
    return dims, lo, hi


def _signs(dims):
    return 1 - 2 * (np.asarray(dims) % 2)


def pl_excursion_chi(h: PLFunction, s: float, strict: bool = False) -> int:
    """Euler characteristic of ``{h >= s}`` (or ``{h > s}`` when strict).

    The affine image of an open d-simplex is the open interval (m, M) of its
    closure range. Cutting it by a closed half-space leaves all of it, none
    of it, or a half-open slab (chi 0); an open half-space leaves all, none,
    or an open slab (chi (-1)^d).
    """
    dims, lo, hi = pl_cell_ranges(h)
    const = lo == hi
    if strict:
        hit = np.where(const, lo > s, s < hi)
    else:
        hit = np.where(const, lo >= s, s <= lo)
    return int(np.sum(_signs(dims)[hit]))


def pl_sublevel_chi(h: PLFunction, s: float, strict: bool = True) -> int:
    """Euler characteristic of ``{h < s}`` (strict) or ``{h <= s}`` within the set."""
    dims, lo, hi = pl_cell_ranges(h)
    const = lo == hi
    if strict:
        hit = np.where(const, lo < s, s > lo)
    else:
        hit = np.where(const, lo <= s, s >= hi)
    return int(np.sum(_signs(dims)[hit]))


def critical_values(h) -> np.ndarray:
    """Sorted values where excursion sets can change.

    Distinct cell values for constructible functions (0 included, being
    the value outside the box); distinct vertex values plus 0 for PL ones.
    """
    if isinstance(h, ConstructibleFunction):
        return np.unique(np.append(h.values.ravel(), 0.0))
    if isinstance(h, PLFunction):
        used = sorted({i for c in h.set.cells for i in c})
        return np.unique(np.append(h.vertex_values[used], 0.0))
    raise TypeError(f"unsupported function type {type(h).__name__}")


# --------------------------------------------------------------------------
# step functions of one variable


@dataclass(frozen=True, eq=False)
class StepFunction:
    """A piecewise-constant function of one real variable.

    ``breaks`` (r,) sorted jump locations, ``at`` (r,) values at the jumps,
    ``between`` (r+1,) values on the open gaps, from (-inf, breaks[0]) to
    (breaks[-1], inf).
    """

    breaks: np.ndarray
    at: np.ndarray
    between: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breaks, dtype=float)
        if b.size and not np.all(np.diff(b) > 0):
            raise ValueError("breaks must be strictly increasing")
        if np.shape(self.at) != b.shape or np.shape(self.between) != (b.size + 1,):
            raise ValueError("inconsistent step function arrays")
        object.__setattr__(self, "breaks", b)
        object.__setattr__(self, "at", np.asarray(self.at, dtype=float))
        object.__setattr__(self, "between", np.asarray(self.between, dtype=float))
        pieces = np.concatenate([[0.0], np.cumsum(self.between)])
        points = np.concatenate([[0.0], np.cumsum(self.at)])
        object.__setattr__(self, "_pieces_cum", pieces)
        object.__setattr__(self, "_points_cum", points)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        i = np.searchsorted(self.breaks, x, side="left")
        if not self.breaks.size:
            return self.between[i]
        j = np.minimum(i, self.breaks.size - 1)
        on = self.breaks[j] == x
        return np.where(on, self.at[j], self.between[i])

    def euler_open_interval(self, lo, hi):
        """Euler integral of the step function over open intervals (lo, hi), lo < hi."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        a = np.searchsorted(self.breaks, lo, side="right")
        b = np.searchsorted(self.breaks, hi, side="left")
        # gaps a..b meet (lo, hi) as open intervals; jumps a..b-1 lie inside it
        gaps = self._pieces_cum[b + 1] - self._pieces_cum[a]
        jumps = self._points_cum[b] - self._points_cum[a]
        return jumps - gaps

    def compose(self, fn) -> "StepFunction":
        return StepFunction(self.breaks, fn(self.at), fn(self.between))

    @classmethod
    def identity_floor(cls, m: int, lo: float, hi: float) -> "StepFunction":
        """``floor(m x) / m`` on a window covering [lo, hi]."""
        j = np.arange(int(np.floor(m * lo)) - 1, int(np.ceil(m * hi)) + 2)
        breaks = j / m
        between = np.concatenate([[(j[0] - 1) / m], j / m])
        return cls(breaks, j / m, between)

    @classmethod
    def identity_ceil(cls, m: int, lo: float, hi: float) -> "StepFunction":
        """``ceil(m x) / m`` on a window covering [lo, hi]."""
        j = np.arange(int(np.floor(m * lo)) - 1, int(np.ceil(m * hi)) + 2)
        breaks = j / m
        between = np.concatenate([j / m, [(j[-1] + 1) / m]])
        return cls(breaks, j / m, between)


def cell_step_euler(dims, lo, hi, phi: StepFunction):
    """Euler integral of ``phi o h`` over open convex cells on which h is affine.

    A cell of dimension d with closure range [lo, hi] is, via h, the product
    of the open interval (lo, hi) with an open (d-1)-cell, so the integral is
    ``(-1)^(d-1)`` times the one-dimensional Euler integral of ``phi`` over
    (lo, hi). Where h is constant the cell contributes ``(-1)^d phi(lo)``.
    """
    dims = np.asarray(dims)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    sign = 1 - 2 * (dims % 2)
    const = lo >= hi
    out = np.zeros(np.broadcast(dims, lo).shape)
    if np.any(const):
        out = np.where(const, sign * phi(lo), out)
    if np.any(~const):
        safe_hi = np.where(const, lo + 1.0, hi)
        out = np.where(const, out, -sign * phi.euler_open_interval(lo, safe_hi))
    return out
