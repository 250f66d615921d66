"""
E-values and their inverse
==========================

An E-value is the smallest confounding strength, on the risk-ratio scale,
that could fully account for an observed ratio. This script computes a few
by hand and through the package, and shows how protective ratios are folded
onto the same scale.
"""

import math

from confound_prob import EffectEstimate, evalue_for_ci_limit, evalue_from_ratio, ratio_from_evalue

# The formula is r + sqrt(r (r - 1)) for a ratio r >= 1.
for rr in (1.0, 1.32, 2.0, 4.0):
    print(f"RR = {rr:<5} E-value = {evalue_from_ratio(rr):.6f}")

# A protective ratio is read through its reciprocal, so 0.5 and 2 match.
print("RR = 0.5   E-value =", round(evalue_from_ratio(0.5), 6))
assert math.isclose(evalue_from_ratio(0.5), 2 + math.sqrt(2))

# Several published cases report only the E-value. The inverse map
# r = E^2 / (2E - 1) recovers the ratio that produced it.
for ev in (4.25, 3.686, 1.32):
    r = ratio_from_evalue(ev)
    print(f"E = {ev:<6} -> RR = {r:.6f} -> E = {evalue_from_ratio(r):.6f}")

# With a confidence interval, the companion E-value uses the limit nearer 1.
est = EffectEstimate("RR", 2.0, 1.4, 2.86)
print("CI-limit E-value for RR 2.0 (1.4, 2.86):", round(evalue_for_ci_limit(est), 4))
print("CI touching the null gives", evalue_for_ci_limit(EffectEstimate("RR", 2.0, 1.0, 4.0)))
