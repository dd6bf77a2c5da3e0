"""Lower and upper Hadwiger integrals.

For a compactly supported function h,

    lower:  int_0^inf mu_k{h >= s} - mu_k{h < -s} ds
    upper:  int_0^inf mu_k{h >  s} - mu_k{h <= -s} ds

Constructible functions are integrated exactly from their excursion sets.
PL functions are integrated exactly for k = 0 (Euler characteristic
sweep) and k = n (Lebesgue measure of excursion sets), and by Monte Carlo
over random (n-k)-flats otherwise; on each flat the fibre integral is
computed in closed form, so flat sampling is the only source of error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cells import GridRegion, cell_groups
from .functions import (
    ConstructibleFunction,
    PLFunction,
    StepFunction,
    cell_step_euler,
    critical_values,
    excursion,
    pl_excursion_chi,
    pl_sublevel_chi,
)
from .geometry import hull_measure
from .intrinsic import (
    CroftonConstants,
    UnsupportedDimensionError,
    _check_supported,
    default_constants,
    mu_grid_polynomial,
    run_slices,
)
from . import _mc

__all__ = [
    "IntegralResult",
    "hadwiger_constructible",
    "hadwiger_pl_euler",
    "hadwiger_pl",
    "hadwiger_integral",
    "integrate_step_function",
    "step_integral",
    "verdier_dual",
    "prop31_residual",
    "riemann",
    "euler_integral",
    "pl_excursion_measure",
]

BOUNDS = ("lower", "upper")


@dataclass(frozen=True)
class IntegralResult:
    value: float
    stderr: float
    method: str
    k: int
    bound: str
    samples: int = 0
    seed: int | None = None
    constant: float | None = None

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")
        if self.bound not in BOUNDS:
            raise ValueError(f"bound must be one of {BOUNDS}")


def _check_bound(bound: str) -> None:
    if bound not in BOUNDS:
        raise ValueError(f"bound must be 'lower' or 'upper', got {bound!r}")


def _check_k(k: int, n: int) -> None:
    if not 0 <= k <= n:
        raise ValueError(f"k={k} out of range for n={n}")


def _segments(breaks) -> np.ndarray:
    b = np.unique(np.append(np.asarray(breaks, dtype=float), 0.0))
    return b[b >= 0]


def _sweep(pos, neg, breaks, nodes: int = 1) -> float:
    """Integrate ``pos(s) - neg(s)`` over s >= 0.

    Both integrands vanish beyond ``max(breaks)`` and are polynomials of
    degree < 2*nodes on each gap between consecutive breaks, so Gauss-Legendre
    with ``nodes`` points per gap is exact.
    """
    b = _segments(breaks)
    if b.size < 2:
        return 0.0
    x, w = np.polynomial.legendre.leggauss(nodes)
    total = 0.0
    for a, c in zip(b[:-1], b[1:]):
        half = 0.5 * (c - a)
        for xi, wi in zip(x, w):
            s = a + half * (xi + 1.0)
            total += wi * half * (pos(s) - neg(s))
    return float(total)


# --------------------------------------------------------------------------
# constructible functions


def hadwiger_constructible(h: ConstructibleFunction, k: int, bound: str = "lower") -> IntegralResult:
    """Exact Hadwiger integral of a constructible function.

    The integrand is constant between consecutive critical values, so each
    gap is evaluated at its midpoint.
    """
    _check_bound(bound)
    _check_k(k, h.n)
    pos_mode, neg_mode = ("geq", "lt_neg") if bound == "lower" else ("gt", "leq_neg")

    def mu(s, mode):
        region = excursion(h, s, mode)
        return float(mu_grid_polynomial(region)[k]) if region.mask.any() else 0.0

    value = _sweep(
        lambda s: mu(s, pos_mode),
        lambda s: mu(s, neg_mode),
        np.abs(critical_values(h)),
    )
    return IntegralResult(value, 0.0, "excursion-exact", k, bound)


def euler_integral(h: ConstructibleFunction) -> float:
    """Cellwise Euler integral: sum of value * (-1)^dim."""
    dims = h.complex.cell_dims()
    return float(np.sum(h.values * (1 - 2 * (dims % 2))))


def verdier_dual(h: ConstructibleFunction) -> ConstructibleFunction:
    """Signed combinatorial dual: D 1_cell = (-1)^dim 1_closure(cell), extended linearly.

    The operator is a tensor product of one-dimensional operators, applied
    axis by axis.
    """
    v = np.array(h.values, dtype=float)
    for axis in range(h.n):
        v = np.moveaxis(v, axis, 0)
        out = v.copy()
        out[1::2] = -v[1::2]
        out[:-1:2] -= v[1::2]
        out[2::2] -= v[1::2]
        v = np.moveaxis(out, 0, axis)
    return ConstructibleFunction(h.complex, v)


def prop31_residual(h: ConstructibleFunction, k: int) -> tuple[float, float]:
    """``(int h dmu_k, (-1)^(n-k) int Dh dmu_k)`` for the signed dual D."""
    lhs = hadwiger_constructible(h, k).value
    rhs = (-1) ** (h.n - k) * hadwiger_constructible(verdier_dual(h), k).value
    return lhs, rhs


# --------------------------------------------------------------------------
# PL functions: exact paths


def _top_simplices(h: PLFunction):
    for d, verts, idx in cell_groups(h.set):
        if d == h.n:
            return verts, h.vertex_values[idx]
    return np.empty((0, h.n + 1, h.n)), np.empty((0, h.n + 1))


def _clipped_volume(verts: np.ndarray, vals: np.ndarray, t: float) -> float:
    """Volume of ``{x in simplex : h(x) > t}`` for affine h."""
    above = vals > t
    if above.all():
        return hull_measure(verts)
    if not above.any():
        return 0.0
    pts = [verts[above]]
    for i in np.flatnonzero(~above):
        for j in np.flatnonzero(above):
            w = (t - vals[i]) / (vals[j] - vals[i])
            pts.append((verts[i] + w * (verts[j] - verts[i]))[None])
    return hull_measure(np.concatenate(pts))


def _superlevel_volume(verts, vals, t: float) -> float:
    if len(verts) == 0 or not np.isfinite(t):
        if t == -np.inf:
            return float(sum(hull_measure(v) for v in verts))
        return 0.0
    if verts.shape[2] == 1:
        length = np.abs(verts[:, 1, 0] - verts[:, 0, 0])
        lo, hi = vals.min(axis=1), vals.max(axis=1)
        span = np.where(hi > lo, hi - lo, 1.0)
        frac = np.where(hi > lo, np.clip((hi - t) / span, 0.0, 1.0), (lo > t).astype(float))
        return float(np.sum(length * frac))
    return float(sum(_clipped_volume(v, f, t) for v, f in zip(verts, vals)))


def pl_excursion_measure(h: PLFunction, k: int, t: float, relation: str) -> float:
    """mu_k of ``{h rel t}`` (within the set) for k in {0, n}.

    ``relation`` is one of ``geq``, ``gt``, ``lt``, ``leq``.
    """
    if k == 0:
        if relation == "geq":
            return pl_excursion_chi(h, t, strict=False)
        if relation == "gt":
            return pl_excursion_chi(h, t, strict=True)
        if relation == "lt":
            return pl_sublevel_chi(h, t, strict=True)
        if relation == "leq":
            return pl_sublevel_chi(h, t, strict=False)
        raise ValueError(f"unknown relation {relation!r}")
    if k == h.n:
        verts, vals = _top_simplices(h)
        # level sets of a nonconstant affine function are Lebesgue-null
        if relation in ("geq", "gt"):
            return _superlevel_volume(verts, vals, t)
        total = _superlevel_volume(verts, vals, -np.inf)
        return total - _superlevel_volume(verts, vals, t)
    raise UnsupportedDimensionError("exact PL excursion measures exist for k = 0 and k = n only")


def _identity(x):
    return np.asarray(x, dtype=float)


def _pl_sweep(h: PLFunction, k: int, bound: str, profile=None) -> float:
    """Excursion sweep of ``c o h`` with thresholds pulled back through c."""
    if profile is None:
        inv_least = inv_greatest = _identity
        knots = np.empty(0)
        c = _identity
    else:
        inv_least, inv_greatest, c = profile.inverse_least, profile.inverse_greatest, profile
        knots = np.asarray(profile.x, dtype=float)
    crit = critical_values(h)
    breaks = np.abs(c(crit))
    nodes = 1
    if k == h.n and k > 0:
        breaks = np.concatenate([breaks, np.abs(c(knots))])
        nodes = h.n // 2 + 1
    if bound == "lower":
        pos = lambda s: pl_excursion_measure(h, k, float(inv_least(s)), "geq")
        neg = lambda s: pl_excursion_measure(h, k, float(inv_least(-s)), "lt")
    else:
        pos = lambda s: pl_excursion_measure(h, k, float(inv_greatest(s)), "gt")
        neg = lambda s: pl_excursion_measure(h, k, float(inv_greatest(-s)), "leq")
    return _sweep(pos, neg, breaks, nodes)


def hadwiger_pl_euler(h: PLFunction, bound: str = "lower", profile=None) -> IntegralResult:
    """Exact lower/upper Euler integral of a PL function (optionally of ``profile o h``)."""
    _check_bound(bound)
    return IntegralResult(_pl_sweep(h, 0, bound, profile), 0.0, "excursion-exact", 0, bound)


def riemann(h) -> float:
    """Lebesgue integral (the k = n Hadwiger integral)."""
    if isinstance(h, ConstructibleFunction):
        return float(np.sum(h.complex.cell_volumes() * h.values))
    if isinstance(h, PLFunction):
        verts, vals = _top_simplices(h)
        if len(verts) == 0:
            return 0.0
        e = verts[:, 1:] - verts[:, :1]
        vol = np.abs(np.linalg.det(e)) / math.factorial(h.n)
        return float(np.sum(vol * vals.mean(axis=1)))
    raise TypeError(f"unsupported function type {type(h).__name__}")


# --------------------------------------------------------------------------
# PL functions: slices


def _slice_mc(h: PLFunction, k: int, samples: int, seed: int, threads: int, constants, per_piece):
    """Average over random flats of the sum of ``per_piece`` over sliced cells."""
    n = h.n
    const = (constants or default_constants()).get(n, k)
    groups = [(d, v, idx) for d, v, idx in cell_groups(h.set) if d >= k]
    if not groups:
        return 0.0, 0.0, const
    from .cells import slice_pieces

    def per_flat(gi, d, verts, idx, normals, coords):
        margin, lo, hi = slice_pieces(normals, coords, verts, h.vertex_values[idx])
        hit = margin > 0
        vals = np.where(hit, per_piece(d - k, np.nan_to_num(lo), np.nan_to_num(hi)), 0.0)
        return margin, vals.sum(axis=1)

    vals = run_slices(h.set, k, samples, seed, threads, per_flat)
    mean, err = _mc.mean_and_stderr(vals)
    return const * mean, const * err, const


def hadwiger_pl(
    h: PLFunction,
    k: int,
    samples: int = 10_000,
    seed: int = 0,
    bound: str = "lower",
    threads: int = 1,
    constants: CroftonConstants | None = None,
    profile=None,
) -> IntegralResult:
    """Hadwiger integral of a PL function (of ``profile o h`` if given).

    k = 0 and k = n are exact excursion sweeps. Otherwise random flats of
    codimension k are drawn; on a flat, each open slice piece of dimension
    d' with closure range [lo, hi] contributes ``(-1)^d' c(lo)`` to the
    lower integral and ``(-1)^d' c(hi)`` to the upper one.
    """
    _check_bound(bound)
    _check_k(k, h.n)
    if k == 0:
        return hadwiger_pl_euler(h, bound, profile)
    if k == h.n:
        return IntegralResult(_pl_sweep(h, k, bound, profile), 0.0, "excursion-quadrature", k, bound)
    _check_supported(h.n, k)
    if samples < 2:
        raise ValueError("need at least two samples")
    c = profile if profile is not None else _identity

    def per_piece(dprime, lo, hi):
        sign = 1 - 2 * (dprime % 2)
        return sign * c(lo if bound == "lower" else hi)

    value, err, const = _slice_mc(h, k, samples, seed, threads, constants, per_piece)
    return IntegralResult(value, err, "slice-mc", k, bound, samples, seed, const)


def hadwiger_integral(h, k: int, bound: str = "lower", **mc) -> IntegralResult:
    """Dispatch on the function type."""
    if isinstance(h, ConstructibleFunction):
        return hadwiger_constructible(h, k, bound)
    if isinstance(h, PLFunction):
        return hadwiger_pl(h, k, bound=bound, **mc)
    raise TypeError(f"unsupported function type {type(h).__name__}")


# --------------------------------------------------------------------------
# step functions and Definition-style approximants


def _value_range(h) -> tuple[float, float]:
    crit = critical_values(h)
    return float(crit.min()), float(crit.max())


def integrate_step_function(
    h,
    phi: StepFunction,
    k: int,
    bound: str = "lower",
    samples: int = 10_000,
    seed: int = 0,
    threads: int = 1,
    constants: CroftonConstants | None = None,
) -> IntegralResult:
    """``int phi(h) dmu_k`` for a step function phi with phi(0) = 0.

    phi o h is constructible, so the integral is linear in it; ``bound`` is
    recorded only.
    """
    _check_k(k, h.n)
    if isinstance(h, ConstructibleFunction):
        g = h.map(phi)
        value = float(mu_grid_polynomial(g.values, g.complex)[k])
        return IntegralResult(value, 0.0, "excursion-exact", k, bound)
    if not isinstance(h, PLFunction):
        raise TypeError(f"unsupported function type {type(h).__name__}")
    if k == 0:
        from .functions import pl_cell_ranges

        dims, lo, hi = pl_cell_ranges(h)
        value = float(np.sum(cell_step_euler(dims, lo, hi, phi)))
        return IntegralResult(value, 0.0, "excursion-exact", k, bound)
    if k == h.n:
        verts, vals = _top_simplices(h)
        # volume of h^-1(gap) for every gap of phi; jump levels are null sets
        edges = np.concatenate([[-np.inf], phi.breaks, [np.inf]])
        sup = np.array([_superlevel_volume(verts, vals, t) for t in edges])
        value = float(np.sum(phi.between * (sup[:-1] - sup[1:])))
        return IntegralResult(value, 0.0, "excursion-exact", k, bound)
    _check_supported(h.n, k)
    if samples < 2:
        raise ValueError("need at least two samples")

    def per_piece(dprime, lo, hi):
        return cell_step_euler(dprime, lo, hi, phi)

    value, err, const = _slice_mc(h, k, samples, seed, threads, constants, per_piece)
    return IntegralResult(value, err, "slice-mc", k, bound, samples, seed, const)


def step_integral(h, m: int, k: int, bound: str = "lower", **mc) -> IntegralResult:
    """``(1/m) int floor(m h) dmu_k`` (lower) or ``(1/m) int ceil(m h) dmu_k`` (upper)."""
    _check_bound(bound)
    if m < 1:
        raise ValueError("m must be a positive integer")
    lo, hi = _value_range(h)
    if bound == "lower":
        phi = StepFunction.identity_floor(m, lo, hi)
    else:
        phi = StepFunction.identity_ceil(m, lo, hi)
    return integrate_step_function(h, phi, k, bound, **mc)
