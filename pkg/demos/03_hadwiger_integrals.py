"""Hadwiger integrals of a piecewise-linear tent and their step approximants.

The lower and upper Euler integrals of a tent disagree (1 versus -1). The
floor approximants floor(m h)/m converge to the lower integral as m grows.
"""

import numpy as np

from hadwiger import PLFunction, SimplicialSet, hadwiger_integral, hadwiger_pl_euler, step_integral

tent = PLFunction(SimplicialSet.from_simplices([[-1.0], [0.0], [1.0]], [[0, 1], [1, 2]]), np.array([0.0, 1.0, 0.0]))

for bound in ("lower", "upper"):
    print(f"{bound} Euler integral: {hadwiger_pl_euler(tent, bound).value:+.6f}")
print(f"k=1 integral (area under the tent): {hadwiger_integral(tent, 1).value:.6f}")

for m in (10, 100, 1000):
    r = step_integral(tent, m, 1, "lower")
    print(f"m={m:5d}  floor step integral at k=1: {r.value:.6f}")
