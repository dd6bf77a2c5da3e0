"""Random and fixed test objects shared by the test modules."""

from __future__ import annotations

import numpy as np

from hadwiger import (
    CoefficientProfile,
    ConstructibleFunction,
    GridComplex,
    GridRegion,
    PLFunction,
    SimplicialSet,
    region_boolean,
)

VALUE_POOL = np.array([-2.0, -1.5, -1.0, -0.5, 0.0, 0.0, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0])


def random_complex(rng, n: int, max_breaks: int = 4) -> GridComplex:
    axes = []
    for _ in range(n):
        m = rng.integers(2, max_breaks + 1)
        axes.append(np.sort(rng.choice(np.arange(-6, 7) * 0.5, size=m, replace=False)))
    return GridComplex(tuple(axes))


def random_grid_function(rng, n: int | None = None, max_breaks: int = 4) -> ConstructibleFunction:
    n = int(rng.integers(1, 4)) if n is None else n
    gc = random_complex(rng, n, max_breaks)
    return ConstructibleFunction(gc, rng.choice(VALUE_POOL, size=gc.shape))


def random_increasing_profile(rng) -> CoefficientProfile:
    x = np.sort(rng.choice(np.arange(-4, 5) * 0.75, size=4, replace=False))
    slopes = rng.choice([0.0, 0.5, 1.0, 2.0], size=3)
    if not slopes.any():
        slopes[0] = 1.0
    y = np.concatenate([[0.0], np.cumsum(slopes * np.diff(x))])
    return _vanishing_profile(x, y)


def _vanishing_profile(x, y) -> CoefficientProfile:
    # shift the linearly extrapolated function so that it vanishes at 0
    y = np.asarray(y, dtype=float)
    if 0 < x[0]:
        at0 = y[0] - x[0] * (y[1] - y[0]) / (x[1] - x[0])
    elif 0 > x[-1]:
        at0 = y[-1] - x[-1] * (y[-1] - y[-2]) / (x[-1] - x[-2])
    else:
        at0 = np.interp(0.0, x, y)
    return CoefficientProfile(x, y - at0)


def random_valuation_profiles(rng, n: int) -> tuple:
    return tuple(random_increasing_profile(rng) for _ in range(n + 1))


def random_open_box_union(rng, n: int) -> GridRegion:
    """Union of open boxes in separated lattice slots, so closures are disjoint."""
    slots = rng.integers(1, 3, size=n)
    picks = [tuple(rng.integers(0, s) for s in slots) for _ in range(int(rng.integers(1, 4)))]
    region = None
    for p in dict.fromkeys(picks):
        lo = np.array([3.0 * j + rng.uniform(0, 0.5) for j in p])
        hi = lo + rng.uniform(0.5, 2.0, size=n)
        box = GridRegion.open_box(lo, hi)
        region = box if region is None else region_boolean(region, box, "union")
    return region


def tent() -> PLFunction:
    ss = SimplicialSet.from_simplices([[-1.0], [0.0], [1.0]], [[0, 1], [1, 2]])
    return PLFunction(ss, np.array([0.0, 1.0, 0.0]))


def cone(height: float = 1.0) -> PLFunction:
    verts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]
    tris = [[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 1]]
    ss = SimplicialSet.from_simplices(verts, tris)
    return PLFunction(ss, np.array([height, 0, 0, 0, 0], dtype=float))


def unit_square() -> SimplicialSet:
    return SimplicialSet.from_simplices([[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 1, 2], [0, 2, 3]])


def random_unimodal_pl(rng) -> PLFunction:
    """A random tent (1D) or cone over a random convex polygon (2D), peak in [1, 3]."""
    height = rng.uniform(1.0, 3.0)
    if rng.random() < 0.4:
        a, c = -rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0)
        apex = rng.uniform(a + 0.1 * (c - a), c - 0.1 * (c - a))
        ss = SimplicialSet.from_simplices([[a], [apex], [c]], [[0, 1], [1, 2]])
        return PLFunction(ss, np.array([0.0, height, 0.0]))
    m = int(rng.integers(3, 8))
    # jittered even spacing keeps angular gaps below pi, so the apex is interior
    angles = np.linspace(0, 2 * np.pi, m, endpoint=False) + rng.uniform(-0.3, 0.3, size=m) * np.pi / m
    radii = rng.uniform(0.5, 2.0, size=m)
    ring = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    verts = np.vstack([[0.0, 0.0], ring])
    tris = [[0, 1 + i, 1 + (i + 1) % m] for i in range(m)]
    ss = SimplicialSet.from_simplices(verts, tris)
    return PLFunction(ss, np.concatenate([[height], np.zeros(m)]))


def random_pl_2d(rng) -> PLFunction:
    """A PL function on a triangulated square with random vertex values (possibly multimodal)."""
    g = 3
    xs = np.linspace(0.0, 1.0, g)
    verts = np.array([[x, y] for y in xs for x in xs])
    tris = []
    for j in range(g - 1):
        for i in range(g - 1):
            a, b, c, d = j * g + i, j * g + i + 1, (j + 1) * g + i + 1, (j + 1) * g + i
            tris += [[a, b, c], [a, c, d]]
    ss = SimplicialSet.from_simplices(verts, tris)
    return PLFunction(ss, rng.choice([-1.0, -0.5, 0.0, 0.5, 1.0, 2.0], size=len(verts)))
