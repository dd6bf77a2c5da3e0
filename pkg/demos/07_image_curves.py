"""Euler characteristic curve of a small synthetic grayscale image.

Writes a PGM with two bright blobs and a dimmer bridge, then reads mu_0 of
{h >= s} across levels. Only the brighter blob survives the top levels, both
show up in the middle, and they merge once s drops below the bridge.
"""

import tempfile
from pathlib import Path

import numpy as np

from hadwiger import StepFunction, excursion, ingest_image, mu_grid_polynomial

img = np.zeros((5, 9), dtype=int)
img[1:4, 1:4] = 200
img[1:4, 5:8] = 220
img[2, 4] = 90

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "blobs.pgm"
    body = "\n".join(" ".join(map(str, row)) for row in img)
    path.write_text(f"P2\n{img.shape[1]} {img.shape[0]}\n255\n{body}\n")
    h = ingest_image(path, "max")

for s in (0.2, 0.5, 0.8, 0.85):
    mu = mu_grid_polynomial(excursion(h, s, "geq"))
    print(f"s={s:.2f}  chi={mu[0]:+.0f}  perimeter/2={mu[1]:.1f}  area={mu[2]:.1f}")
