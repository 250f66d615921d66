"""
From an E-value to a probability
================================

The E-value says how strong confounding would have to be. The bias model
adds a prior on how strong confounding tends to be, and returns the
posterior probability that it reaches the E-value.
"""

import math

from confound_prob import (
    EffectEstimate,
    PriorSpec,
    evalue_from_ratio,
    p_exceed_closed_form,
    posterior_params,
    posterior_summaries,
    to_log_estimate,
)

# A risk ratio of 2 with a tight standard error on the log scale.
le = to_log_estimate(EffectEstimate("RR", 2.0, se_log=0.1))
prior = PriorSpec(sigma_theta=1.0, sigma_gamma=0.5)

pp = posterior_params(le, prior)
print(f"v = {pp.v:.4f}, posterior location m = {pp.m:.5f}, scale = {pp.sigma_post:.5f}")

gamma_star = evalue_from_ratio(2.0)
p = p_exceed_closed_form(pp, gamma_star)
print(f"P(Gamma >= {gamma_star:.4f} | data) = {p:.5f}")

summ = posterior_summaries(le, prior, pp)
lo, hi = summ["theta_true_ci"]
print(f"E[log Gamma] = {summ['mean_log_gamma']:.4f}")
print(f"E[log RR_true] = {summ['mean_theta_true']:.4f}, 95% interval ({lo:.4f}, {hi:.4f})")
print(f"on the ratio scale: {math.exp(summ['mean_theta_true']):.3f} ({math.exp(lo):.3f}, {math.exp(hi):.3f})")

# When the data say nothing (huge s) the answer falls back to the prior tail.
vague = posterior_params(to_log_estimate(EffectEstimate("RR", 2.0, se_log=1000.0)), prior)
print("uninformative data:", round(p_exceed_closed_form(vague, gamma_star), 5),
      "vs prior tail", round(2 * 0.5 * math.erfc(math.log(gamma_star) / 0.5 / math.sqrt(2)), 5))

# Larger observed ratios demand stronger confounding and so get smaller probabilities.
for rr in (1.2, 1.5, 2.0, 3.0, 5.0):
    le_r = to_log_estimate(EffectEstimate("RR", rr, se_log=0.15))
    print(f"RR {rr:<4} E = {evalue_from_ratio(rr):6.3f}  P = "
          f"{p_exceed_closed_form(posterior_params(le_r, prior), evalue_from_ratio(rr)):.4f}")
