"""Intrinsic volumes of a 2 x 3 rectangle, exactly and by Monte Carlo.

mu_0 is the Euler characteristic, mu_1 half the perimeter, mu_2 the area.
Both estimators should land within a few standard errors of mu_1 = 5.
"""

from hadwiger import GridRegion, mu_crofton, mu_grid_polynomial, mu_slice_mc

box = GridRegion.closed_box([0, 0], [2, 3])
print("exact mu_0..mu_2:", mu_grid_polynomial(box).tolist())

for name, fn in [("crofton", mu_crofton), ("slice", mu_slice_mc)]:
    est = fn(box, 1, samples=20_000, seed=1)
    print(f"{name:8s} mu_1 = {est.value:.4f} +- {est.stderr:.4f} (constant {est.constant:.6f})")
