# %% [markdown]
# # Continued fractions and alpha-adic numeration
#
# The heights where a nonlattice flow has dimensions close to ``Re s = D`` are
# governed by how well ``w_2/w_1`` is approximated by rationals.

# %%
import math

from ssflow import (
    FlowSpec,
    QuadraticIrrational,
    approximability_profile,
    expand_cf,
    orbit_of_approximation,
    ostrowski,
    simultaneous_approx,
)

phi = QuadraticIrrational.golden()
cf = expand_cf(phi, 15)
print("partial quotients:", cf.partial_quotients)
print("denominators:     ", cf.q)

# %% [markdown]
# A binary64 number only carries about 16 digits, so its expansion stops
# being meaningful after a while.  The flag marks where.

# %%
for label, value in [("phi as float", float(phi)), ("log 3 / log 2", math.log(3) / math.log(2)), ("pi", math.pi)]:
    e = expand_cf(value, 80)
    print(f"{label:14s} {len(e.partial_quotients):3d} trustworthy quotients, early stop: {e.early_stop}")

# %% [markdown]
# ## Ostrowski expansions
#
# Every positive integer is a sum of denominators with constrained digits;
# the lowest nonzero digit decides how close ``n phi`` is to an integer.

# %%
cf = expand_cf(phi, 40)
for n in (50, 60, 89, 1000):
    exp = ostrowski(n, cf)
    parts = " + ".join(f"{d}*q{i}" if d > 1 else f"q{i}" for i, d in reversed(list(enumerate(exp.digits))) if d)
    m, lo, hi, k = orbit_of_approximation(n, cf)
    print(f"{n:5d} = {parts:28s}  {lo:+.5f} < {n}*phi - {m} = {phi.offset(n, m):+.5f} < {hi:+.5f}")

# %% [markdown]
# ## Three generators
#
# For more weights there is no continued fraction; the search is a scan.

# %%
flow = FlowSpec((math.log(2), math.log(3), math.log(5)))
for Q in (5, 10, 20, 50):
    a = simultaneous_approx(flow, Q)
    print(f"Q = {Q:3d}: q = {a.q:5d}, p = {a.p}, max deviation {max(abs(d) for d in a.deltas):.4f}")

prof = approximability_profile(flow, 2000)
print(f"min ratio e(q) sqrt(q)/w_1 over q <= 2000: {prof.ratio.min():.4f}")
