# %% [markdown]
# # Complex dimensions of the golden flow
#
# Two weights, ``log 2`` and ``phi log 2``.  Their ratio is the golden mean, so
# the flow is nonlattice and its complex dimensions never line up on vertical
# lines.  They come close to ``Re s = D`` exactly at the heights
# ``2 pi q / w_1`` where ``q`` is a Fibonacci number.

# %%
import math

import numpy as np

from ssflow import (
    dimension_free_region,
    expand_cf,
    golden_flow,
    nonlattice_dimensions,
    perturbation_series,
    predict_dimension,
    solve_dimension,
)

flow = golden_flow()
pair = solve_dimension(flow)
print(f"D  = {pair.D:.10f}")
print(f"D0 = {pair.D0:.10f}")

# %% [markdown]
# ## The window |Im s| <= 560
#
# Candidates come from a lattice surrogate (a convergent of phi) and are then
# Newton-refined against ``1 - 2^-s - 2^-phi s``.

# %%
window = nonlattice_dimensions(flow, 560)
print(len(window), "dimensions; surrogate q =", window.metadata["surrogate_q"])
upper = sorted((d for d in window.nontrivial() if d.omega.imag > 0), key=lambda d: -d.omega.real)
print("closest to the line Re s = D:")
for d in upper[:6]:
    print(f"  D {d.omega.real - pair.D:+.6f} + {d.omega.imag:.4f}i")

# %% [markdown]
# ## Perturbation series
#
# ``Delta(x)`` is the shift of a dimension away from ``D + 2 pi i q/w_1``
# caused by the phase error ``x = 2 pi i (q phi - p)``.

# %%
series = perturbation_series(flow, 8)
print("coefficients:", ", ".join(f"{c:+.5f}" for c in series.coefficients))
print(f"radius of convergence >= {series.radius_lower_bound:.3f}")

cf = expand_cf(flow.alpha, 40)
print(f"{'q':>4} {'predicted':>28} {'refined':>28} {'|diff|':>9}")
for q in (2, 3, 5, 8, 13, 21, 34, 55):
    pred = predict_dimension(flow, q, cf)
    near = window.omegas[np.argmin(np.abs(window.omegas - pred.omega))]
    print(f"{q:>4} {pred.omega.real:12.8f}{pred.omega.imag:+14.6f}i {near.real:12.8f}{near.imag:+14.6f}i {abs(pred.omega - near):9.1e}")

# %% [markdown]
# ## Dimension-free region
#
# Every dimension at height ``t`` keeps a distance of at least ``B/(M^2 t^2)``
# from the line; for phi the partial quotients are all 1 so ``M = 1``.

# %%
region = dimension_free_region(flow, window)
print(f"B = {region.B:.4f}, M = {region.M}, smallest fitted B' = {region.fitted_B:.4f}")
print(f"smallest ratio (gap / bound) = {region.min_ratio:.3f}")
for lo, hi, g in zip(region.band_edges[:-1], region.band_edges[1:], region.gap):
    bound = region.B / hi**2
    print(f"  t in ({lo:6.1f}, {hi:6.1f}]: gap {g:.6f}   B/t^2 at band top {bound:.6f}")
print(f"window written as CSV has {len(window.to_csv().splitlines()) - 1} rows")
print(f"2 pi / w_1 = {2 * math.pi / flow.weights[0]:.4f}")
