# %% [markdown]
# # The explicit formula for lattice flows
#
# For a lattice flow every vertical line of complex dimensions collapses into
# one periodic function, and the orbit counting function ``psi`` has a closed
# form.  Here it is checked against brute-force orbit enumeration.

# %%
import math

from ssflow import (
    cantor_flow,
    classify_lattice,
    dimensions_window,
    enumerate_orbits,
    fibonacci_flow,
    lattice_psi,
    psi,
    psi_integral,
    psi_level2,
)

# %% [markdown]
# ## Cantor flow: one line, a sawtooth profile
#
# ``psi(x) = g_1(log x) x^D - 2 log 3`` with ``g_1`` periodic of period log 3.

# %%
flow = cantor_flow()
lat = classify_lattice(flow)
census = enumerate_orbits(flow, 12 * math.log(3))
print(f"{len(census)} primitive orbits up to weight 12 log 3")
for n in range(1, 7):
    x = 3.0**n
    print(f"x = 3^{n}: census {psi(census, x):10.4f}   closed form {lattice_psi(flow, lat, x, 'full'):10.4f}")

print("half-way between jumps the two agree to rounding:")
for n in range(1, 7):
    x = 3.0 ** (n + 0.5)
    print(f"  x = 3^{n}.5: {psi(census, x):.12f} {lattice_psi(flow, lat, x):.12f}")

# %% [markdown]
# ## Fibonacci flow: two lines and a sign
#
# The second line sits at ``Re s = -D`` shifted by half a period, and it
# contributes a term with the sign ``(-1)^[log x / log 2]``.

# %%
flow = fibonacci_flow()
lat = classify_lattice(flow)
census = enumerate_orbits(flow, 16 * math.log(2))
window = dimensions_window(flow, 30)
for omega, res in window.lines:
    print(f"line through {omega.real:+.6f}{omega.imag:+.6f}i, residue {res}")
for n in range(2, 12):
    x = 2.0**n * 1.2
    print(f"x = {x:9.1f}: census {psi(census, x):10.4f}  closed form {lattice_psi(flow, lat, x):10.4f}")

# %% [markdown]
# ## Level 2
#
# Integrating once more gives an absolutely convergent sum, here again exact.

# %%
for x in (10.0, 100.0, 1000.0, 2.0**15):
    a, b = psi_level2(flow, window, x), psi_integral(census, x)
    print(f"x = {x:9.1f}: level-2 formula {a:14.6f}  census integral {b:14.6f}  rel {abs(a - b) / b:.1e}")
