# Admissible exponent windows: which (m, n, p, rho, alpha) combinations
# support the contraction argument, and what regularity indices they induce.

from gnslab import HypothesisError, check_hypotheses, hypothesis_margins, window_margins

SETS = [
    ("H0", dict(m=1.0, n=3, p=2.0, rho=4.0, alpha=1.0)),
    ("H1", dict(m=1.5, n=3, p=3.0, rho=7.0, alpha=1.0)),
    ("H2", dict(m=2.0, n=3, p=3.0, rho=6.0, alpha=1.0)),
]

print(f"{'label':<6} {'s':>9} {'s~':>9} {'rho~':>7} {'s0':>8} {'p0':>6}")
for label, params in SETS:
    h = check_hypotheses(**params)
    print(f"{label:<6} {h.s:>9.5f} {h.s_tilde:>9.5f} {h.rho_tilde:>7.3f} {h.s0:>8.5f} {h.p0:>6.3f}")

h = check_hypotheses(**SETS[2][1])
print("\ntightest margins for H2:")
for name, margin in sorted(hypothesis_margins(h).items(), key=lambda kv: kv[1])[:3]:
    print(f"  {margin:+.4f}  {name}")
w = window_margins(h)
print(f"integrability window: lower slack {w['lower']:.4f}, upper slack {w['upper']:.4f}, "
      f"defect {w['equality_defect']:.1e}")

# p below the dimension threshold is rejected with named violations
try:
    check_hypotheses(m=2.0, n=3, p=4.0, rho=6.0, alpha=1.0)
except HypothesisError as exc:
    print("\nrejected p=4, n=3:")
    for name, message in exc.violations:
        print(f"  {name}: {message}")
