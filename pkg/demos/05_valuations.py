"""A valuation built from coefficient profiles, checked for additivity and invariance."""

import numpy as np

from hadwiger import (
    CoefficientProfile,
    ConstructibleFunction,
    GridRegion,
    HadwigerValuation,
    additivity_residual,
    evaluate,
    excursion_difference_form,
    invariance_check,
)

v = HadwigerValuation(
    (
        CoefficientProfile.linear(1.0),
        CoefficientProfile([-1.0, 0.0, 1.0], [-0.5, 0.0, 2.0]),
        CoefficientProfile.linear(0.5),
    ),
    "lower",
)

f = ConstructibleFunction.indicator(GridRegion.closed_box([0, 0], [2, 1]), 2.0)
g = ConstructibleFunction.indicator(GridRegion.closed_box([1, 0], [3, 2]), 1.0)

print(f"v(f) = {evaluate(v, f):.6f}, difference form {excursion_difference_form(v, f):.6f}")
print(f"additivity residual: {additivity_residual(v, f, g):.2e}")

quarter = np.array([[0.0, -1.0], [1.0, 0.0]])
resid, err = invariance_check(v, f, quarter, np.array([5.0, -2.0]))
print(f"invariance residual under a quarter turn and shift: {resid:.2e}")
