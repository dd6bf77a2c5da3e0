"""The dual of a grid function, and integrals that it turns inside out.

Integrating h against mu_k matches (-1)^(n-k) times the integral of its
dual, for every k.
"""

import numpy as np

from hadwiger import ConstructibleFunction, GridComplex, prop31_residual, verdier_dual

gc = GridComplex((np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0])))
values = np.full(gc.shape, 2.0)
values[1:, 1] = [2.0, 1.0, -1.0, 0.0]
h = ConstructibleFunction(gc, values)

print("h:\n", h.values.T)
print("dual:\n", verdier_dual(h).values.T + 0.0)
for k in range(h.n + 1):
    lhs, rhs = prop31_residual(h, k)
    print(f"k={k}: {lhs:+.4f} vs {rhs:+.4f}")
