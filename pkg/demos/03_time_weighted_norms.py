"""
Time-weighted norms of step trajectories
========================================

A trajectory here is a piecewise-constant record: value v_j held on the
interval (t_{j-1}, t_j].  The weighted norm sorts values by how long they
persist, then integrates with a power weight in time.
"""

import math

import numpy as np

from gnslab import LorentzIndex, TimeSamples, decreasing_rearrangement, holder_product_check, lorentz_norm, power_identity_check

ts = TimeSamples([0.25, 0.75, 1.0, 2.0], [1.0, 3.0, 0.5, 2.0])
star = decreasing_rearrangement(ts)
print("values by persistence:", np.round(star.v, 3), "on lengths", np.round(star.lengths(), 3))

# a constant trajectory has a closed-form norm: v T^(1/rho) (rho/r)^(1/r)
const = TimeSamples([0.5, 1.0], [2.0, 2.0])
for rho, r in ((3.0, 2.0), (2.0, math.inf)):
    got = lorentz_norm(const, LorentzIndex(rho, r))
    expect = 2.0 * 1.0 ** (1.0 / rho) * ((rho / r) ** (1.0 / r) if math.isfinite(r) else 1.0)
    print(f"constant value 2 on (0,1], (rho,r)=({rho},{r}): {got:.6f}  (closed form {expect:.6f})")

# raising the trajectory to a power m divides both indices by m
rng = np.random.default_rng(5)
t = np.sort(rng.uniform(0.1, 2.0, size=12))
steps = TimeSamples(t, rng.uniform(0.0, 3.0, size=12))
lhs, rhs = power_identity_check(steps, 2.5, LorentzIndex(2.0, 1.5))
print(f"power identity m=2.5: lhs {lhs:.8f} vs rhs {rhs:.8f}, rel diff {abs(lhs - rhs) / rhs:.2e}")

# Hoelder across a product of trajectories: summed reciprocal indices
a = TimeSamples(t, rng.uniform(0.5, 2.0, size=12))
b = TimeSamples(t, rng.uniform(0.5, 2.0, size=12))
lhs, rhs = holder_product_check([a, b], [6.0, 6.0], LorentzIndex(3.0, 2.0))
print(f"product norm {lhs:.6f} <= factor product {rhs:.6f}: {lhs <= rhs}")
