"""Composing with a decreasing profile swaps lower and upper integrals.

For c(x) = -x, the upper integral of ceil(m h)/m composed with c matches
the lower integral of the floor-type approximant of c(h) at every m, and
both approach minus the cone volume (2.3 * 2 / 3 at k = 2).
"""

import numpy as np

from hadwiger import CoefficientProfile, PLFunction, SimplicialSet, decreasing_composition

verts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]
tris = [[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 1]]
cone = PLFunction(SimplicialSet.from_simplices(verts, tris), np.array([2.3, 0, 0, 0, 0]))

for k in (0, 2):
    rows = decreasing_composition(cone, CoefficientProfile.linear(-1.0), k, [10, 100, 1000], samples=2000, seed=0)
    for r in rows:
        print(f"k={k} m={r['m']:5d}  lhs={r['lhs']:+.5f}  rhs={r['rhs']:+.5f}  diff={r['diff']:+.2e}")
