"""Euclidean-invariant valuations on functions built from Hadwiger integrals.

A :class:`HadwigerValuation` is ``v(h) = sum_k int c_k(h) dmu_k`` (lower or
upper) with continuous monotone piecewise-linear coefficient profiles
``c_k`` vanishing at 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cells import GridComplex
from .functions import ConstructibleFunction, PLFunction, StepFunction, critical_values, excursion, lattice
from .integrals import (
    IntegralResult,
    hadwiger_constructible,
    hadwiger_pl,
    integrate_step_function,
)
from .intrinsic import mu_grid_polynomial

__all__ = [
    "CoefficientProfile",
    "HadwigerValuation",
    "ProfileError",
    "evaluate",
    "evaluate_terms",
    "excursion_difference_form",
    "additivity_residual",
    "decreasing_composition",
    "invariance_residual",
    "invariance_check",
    "move_grid_function",
]


class ProfileError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CoefficientProfile:
    """Continuous monotone piecewise-linear c: R -> R with c(0) = 0.

    ``x`` are strictly increasing knots and ``y`` the values there. Outside
    the knots the first/last segment is continued linearly, or held
    constant when ``extrapolate="constant"``.
    """

    x: np.ndarray
    y: np.ndarray
    extrapolate: str = "linear"

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).reshape(-1)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if x.size < 2 or x.size != y.size:
            raise ProfileError("a profile needs at least two knots with one value each")
        if not np.all(np.diff(x) > 0):
            raise ProfileError("knots must be strictly increasing")
        if self.extrapolate not in ("linear", "constant"):
            raise ProfileError("extrapolate must be 'linear' or 'constant'")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if abs(float(self(0.0))) > 1e-12:
            raise ProfileError(f"profile must vanish at 0, got c(0) = {float(self(0.0))}")
        slopes = self.slopes
        if not (np.all(slopes >= 0) or np.all(slopes <= 0)):
            raise ProfileError("profile is not monotone")

    @classmethod
    def linear(cls, slope: float) -> "CoefficientProfile":
        return cls([-1.0, 1.0], [-slope, slope])

    @classmethod
    def zero(cls) -> "CoefficientProfile":
        return cls.linear(0.0)

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.y) / np.diff(self.x)

    def _end_slopes(self):
        if self.extrapolate == "constant":
            return 0.0, 0.0
        s = self.slopes
        return s[0], s[-1]

    @property
    def monotonicity(self) -> str:
        s = self.slopes
        if np.all(s == 0):
            return "zero"
        return "increasing" if np.all(s >= 0) else "decreasing"

    @property
    def strictly_decreasing(self) -> bool:
        left, right = self._end_slopes()
        return bool(np.all(self.slopes < 0) and left < 0 and right < 0)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        left, right = self._end_slopes()
        with np.errstate(invalid="ignore"):
            out = np.interp(t, self.x, self.y)
            out = np.where(t < self.x[0], self.y[0] + left * (t - self.x[0]), out)
            out = np.where(t > self.x[-1], self.y[-1] + right * (t - self.x[-1]), out)
        return out

    def negated(self) -> "CoefficientProfile":
        return CoefficientProfile(self.x, -self.y, self.extrapolate)

    def _limits(self):
        left, right = self._end_slopes()
        lo = -np.inf if left > 0 else (np.inf if left < 0 else self.y[0])
        hi = np.inf if right > 0 else (-np.inf if right < 0 else self.y[-1])
        return lo, hi

    def inverse_least(self, s):
        """Least x with c(x) >= s, for nondecreasing c (+-inf when none / all)."""
        s = np.asarray(s, dtype=float)
        return np.vectorize(self._inv_least_scalar, otypes=[float])(s)

    def inverse_greatest(self, s):
        """Greatest x with c(x) <= s, for nondecreasing c (+-inf when all / none)."""
        s = np.asarray(s, dtype=float)
        return np.vectorize(self._inv_greatest_scalar, otypes=[float])(s)

    def _inv_least_scalar(self, s: float) -> float:
        lo, hi = self._limits()
        left, right = self._end_slopes()
        x, y = self.x, self.y
        if s > hi or (s == hi and right == 0 and s > y[-1]):
            return np.inf
        if s <= lo:
            return -np.inf
        i = int(np.searchsorted(y, s, side="left"))
        if i == 0:
            return x[0] - (y[0] - s) / left
        if i == y.size:
            if right == 0:
                return np.inf
            return x[-1] + (s - y[-1]) / right
        return x[i - 1] + (s - y[i - 1]) * (x[i] - x[i - 1]) / (y[i] - y[i - 1])

    def _inv_greatest_scalar(self, s: float) -> float:
        lo, hi = self._limits()
        left, right = self._end_slopes()
        x, y = self.x, self.y
        if s >= hi:
            return np.inf
        if s < lo:
            return -np.inf
        i = int(np.searchsorted(y, s, side="right")) - 1
        if i == y.size - 1:
            return x[-1] + (s - y[-1]) / right
        if i < 0:
            if left == 0:
                return -np.inf
            return x[0] - (y[0] - s) / left
        return x[i] + (s - y[i]) * (x[i + 1] - x[i]) / (y[i + 1] - y[i])

    def to_dict(self) -> dict:
        return {"x": self.x.tolist(), "y": self.y.tolist(), "extrapolate": self.extrapolate}


@dataclass(frozen=True, eq=False)
class HadwigerValuation:
    profiles: tuple
    bound: str = "lower"

    def __post_init__(self):
        profiles = tuple(self.profiles)
        if not profiles:
            raise ProfileError("need n+1 profiles")
        if self.bound not in ("lower", "upper"):
            raise ValueError("bound must be 'lower' or 'upper'")
        object.__setattr__(self, "profiles", profiles)

    @property
    def n(self) -> int:
        return len(self.profiles) - 1

    @classmethod
    def single(cls, n: int, k: int, profile: CoefficientProfile, bound: str = "lower") -> "HadwigerValuation":
        profs = [CoefficientProfile.zero()] * (n + 1)
        profs[k] = profile
        return cls(tuple(profs), bound)

    def check_evaluable(self) -> None:
        kinds = {p.monotonicity for p in self.profiles} - {"zero"}
        if "decreasing" in kinds:
            raise ProfileError(
                "decreasing coefficient profiles do not give lower/upper continuous valuations"
            )


def _check_dims(v: HadwigerValuation, h) -> None:
    if v.n != h.n:
        raise ValueError(f"valuation has {v.n + 1} profiles but h lives in R^{h.n}")


def evaluate_terms(v: HadwigerValuation, h, samples: int = 10_000, seed: int = 0, threads: int = 1, constants=None) -> list:
    """Per-k Hadwiger integrals ``int c_k(h) dmu_k`` making up ``v(h)``."""
    v.check_evaluable()
    _check_dims(v, h)
    out = []
    for k, c in enumerate(v.profiles):
        if c.monotonicity == "zero":
            out.append(IntegralResult(0.0, 0.0, "excursion-exact", k, v.bound))
        elif isinstance(h, ConstructibleFunction):
            out.append(hadwiger_constructible(h.map(c), k, v.bound))
        elif isinstance(h, PLFunction):
            out.append(
                hadwiger_pl(h, k, samples, seed, v.bound, threads, constants, profile=c)
            )
        else:
            raise TypeError(f"unsupported function type {type(h).__name__}")
    return out


def evaluate(v: HadwigerValuation, h, **mc) -> float:
    return float(sum(t.value for t in evaluate_terms(v, h, **mc)))


def excursion_difference_form(v: HadwigerValuation, h: ConstructibleFunction) -> float:
    """Sum over k of finite differences of c_k times mu_k of excursion sets.

    Positive values r_1 < ... < r_p contribute ``(c(r_i) - c(r_{i-1})) mu_k{h >= r_i}``
    with r_0 = 0; negative values q_1 > q_2 > ... contribute
    ``(c(q_i) - c(q_{i-1})) mu_k{h <= q_i}`` with q_0 = 0.
    """
    v.check_evaluable()
    _check_dims(v, h)
    vals = critical_values(h)
    pos = vals[vals > 0]
    neg = vals[vals < 0][::-1]
    mus = []
    for r in pos:
        mus.append(("p", r, mu_grid_polynomial(excursion(h, r, "geq"))))
    for q in neg:
        mus.append(("n", q, mu_grid_polynomial(excursion(h, -q, "leq_neg"))))
    total = 0.0
    for k, c in enumerate(v.profiles):
        prev = 0.0
        for kind, r, poly in mus:
            if kind == "n" and prev > 0:
                prev = 0.0
            total += (float(c(r)) - float(c(prev))) * poly[k]
            prev = r
    return float(total)


def additivity_residual(v: HadwigerValuation, f: ConstructibleFunction, g: ConstructibleFunction) -> float:
    """``|v(f) + v(g) - v(f max g) - v(f min g)|``."""
    return abs(
        evaluate(v, f) + evaluate(v, g) - evaluate(v, lattice(f, g, "max")) - evaluate(v, lattice(f, g, "min"))
    )


# --------------------------------------------------------------------------
# decreasing profiles


def _floor_of_decreasing(c: CoefficientProfile, m: int, lo: float, hi: float) -> StepFunction:
    """``x -> floor(m c(x)) / m`` for strictly decreasing c, on a window over [lo, hi]."""
    inc = c.negated()
    j_hi = int(np.ceil(m * float(c(lo)))) + 1
    j_lo = int(np.floor(m * float(c(hi)))) - 1
    js = np.arange(j_hi, j_lo - 1, -1)
    # c(x) = j/m  <=>  -c(x) = -j/m
    breaks = inc.inverse_least(-js / m)
    at = js / m
    between = np.concatenate([[js[0] / m], (js - 1) / m])
    return StepFunction(breaks, at, between)


def decreasing_composition(
    h,
    c: CoefficientProfile,
    k: int,
    m_list=(10, 100, 1000),
    samples: int = 10_000,
    seed: int = 0,
    threads: int = 1,
    constants=None,
) -> list:
    """Compare ``int c(ceil(m h)/m) dmu_k`` with ``int floor(m c(h))/m dmu_k``.

    Returns one row per m with both sides, their difference and, on Monte
    Carlo paths, standard errors. Both sides use the same flats.
    """
    if not c.strictly_decreasing:
        raise ProfileError("the experiment needs a strictly decreasing profile")
    vals = critical_values(h)
    lo, hi = float(vals.min()), float(vals.max())
    rows = []
    for m in m_list:
        if m < 1:
            raise ValueError("m must be positive")
        left = StepFunction.identity_ceil(m, lo, hi).compose(c)
        right = _floor_of_decreasing(c, m, lo, hi)
        kw = dict(samples=samples, seed=seed, threads=threads, constants=constants)
        a = integrate_step_function(h, left, k, "upper", **kw)
        b = integrate_step_function(h, right, k, "lower", **kw)
        rows.append(
            {
                "m": int(m),
                "lhs": a.value,
                "rhs": b.value,
                "diff": abs(a.value - b.value),
                "lhs_stderr": a.stderr,
                "rhs_stderr": b.stderr,
            }
        )
    return rows


# --------------------------------------------------------------------------
# rigid motions


def _check_orthogonal(rotation: np.ndarray) -> None:
    if rotation.ndim != 2 or rotation.shape[0] != rotation.shape[1]:
        raise ValueError("rotation must be a square matrix")
    if not np.allclose(rotation @ rotation.T, np.eye(len(rotation)), rtol=0, atol=1e-12):
        raise ValueError("rotation matrix is not orthogonal")


def move_grid_function(h: ConstructibleFunction, rotation, translation) -> ConstructibleFunction:
    """``h o g^-1`` for ``g(x) = R x + t`` with R a signed permutation matrix."""
    r = np.asarray(rotation, dtype=float)
    t = np.asarray(translation, dtype=float)
    _check_orthogonal(r)
    if not np.all(np.isin(r, (-1.0, 0.0, 1.0))):
        raise ValueError("grid functions can only be moved by axis-aligned motions")
    perm = np.argmax(np.abs(r), axis=1)
    signs = r[np.arange(len(r)), perm]
    vals = np.transpose(h.values, perm)
    axes = []
    for i, (p, s) in enumerate(zip(perm, signs)):
        b = h.complex.breakpoints[p]
        if s < 0:
            vals = np.flip(vals, axis=i)
            b = -b[::-1]
        axes.append(b + t[i])
    return ConstructibleFunction(GridComplex(tuple(axes)), vals)


def invariance_check(
    v: HadwigerValuation,
    h,
    rotation,
    translation,
    samples: int = 10_000,
    seed: int = 0,
    threads: int = 1,
    constants=None,
) -> tuple[float, float]:
    """Residual ``|v(h) - v(h o g^-1)|`` and its combined standard error.

    The moved function is evaluated with an independent stream (seed + 1).
    """
    r = np.asarray(rotation, dtype=float)
    t = np.asarray(translation, dtype=float)
    _check_orthogonal(r)
    if isinstance(h, ConstructibleFunction):
        moved = move_grid_function(h, r, t)
    elif isinstance(h, PLFunction):
        moved = h.transformed(r, t)
    else:
        raise TypeError(f"unsupported function type {type(h).__name__}")
    kw = dict(samples=samples, threads=threads, constants=constants)
    a = evaluate_terms(v, h, seed=seed, **kw)
    b = evaluate_terms(v, moved, seed=seed + 1, **kw)
    resid = abs(sum(x.value for x in a) - sum(x.value for x in b))
    err = float(np.sqrt(sum(x.stderr**2 for x in a) + sum(x.stderr**2 for x in b)))
    return resid, err


def invariance_residual(v: HadwigerValuation, h, rotation, translation, **mc) -> float:
    return invariance_check(v, h, rotation, translation, **mc)[0]
