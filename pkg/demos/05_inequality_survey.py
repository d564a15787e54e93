"""
Empirical constants for the estimate family
===========================================

Draws random band-limited fields and step trajectories, evaluates both
sides of each programmed inequality, and reports the largest observed
lhs/rhs ratio.  Ratios are empirical constants: finite and stable under
reseeding, but never asserted against theoretical values.
"""

import math

from gnslab import ESTIMATE_IDS, Grid, SampleSpec, check_hypotheses, estimate_constant

DESK = {
    "H0": dict(m=1.0, n=2, p=2.0, rho=3.0, alpha=1.0),
    "H1": dict(m=1.5, n=2, p=2.0, rho=6.5, alpha=1.0),
    "H2": dict(m=2.0, n=2, p=3.0, rho=4.5, alpha=1.0),
}
DESIGNATED = {"POW_SMALL": "H0", "BILIN_M1": "H0", "DIFF": "H2", "BILIN": "H2", "BILIN_DIFF": "H2"}

sets = {label: check_hypotheses(**params) for label, params in DESK.items()}
spec = SampleSpec(grid=Grid(2, 64, 2.0 * math.pi), time_nodes=9)

print(f"{'inequality':<12} {'set':<4} {'samples':>7} {'max ratio':>12} {'median':>12} {'violations':>10}")
for ineq_id in ESTIMATE_IDS:
    label = DESIGNATED.get(ineq_id, "H1")
    samples = 2000 if ineq_id == "lemma-ab" else 60
    rep = estimate_constant(ineq_id, sets[label], samples, spec, seed=42)
    print(f"{ineq_id:<12} {rep.hypothesis_label:<4} {rep.samples:>7} "
          f"{rep.max_ratio:>12.5g} {rep.median_ratio:>12.5g} {rep.violations:>10}")
