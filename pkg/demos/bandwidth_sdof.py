"""Choosing the kernel bandwidth by spectral degrees of freedom.

The sDOF of the centered kernel matrix plays the role of a cell count:
too-smooth kernels concentrate the spectrum (few effective directions),
too-rough ones spread it across every data point.  The recommendation rule
keeps the sDOF between max(5, D(D+1)/2) and n/5.
"""

import numpy as np

from quadrisk import recommend_h, standardize
from quadrisk.simgen import ScenarioSpec, generate
from quadrisk.tuning import sdof_bounds

data = generate(ScenarioSpec("M2", 500), seed=4)
data, _ = standardize(data)
n, d = data.shape
lower, upper = sdof_bounds(n, d)

reports, h = recommend_h(data)
print(f"n = {n}, D = {d}, target sDOF range: [{lower:.0f}, {upper:.0f}]\n")
print(f"{'h':>8}  {'sdof':>9}  verdict")
for r in reports:
    marker = "  <- recommended" if r.h == h else ""
    print(f"{r.h:8.3f}  {r.sdof:9.2f}  {r.verdict}{marker}")
