"""
Three engines, one number
=========================

The closed form relies on a truncated-normal reduction of the model. Two
independent engines work from the joint density directly: tensor Simpson
quadrature and importance sampling with the priors as proposal.
"""

from confound_prob import (
    LogEstimate,
    PriorSpec,
    RandomSource,
    p_exceed_closed_form,
    p_exceed_monte_carlo,
    p_exceed_quadrature,
    posterior_params,
)
from confound_prob.oracles import UnreliableEstimateError
from confound_prob.verify import verify_engines

le, prior, gamma_star = LogEstimate(0.69315, 0.1), PriorSpec(1.0, 0.5), 3.414214

closed = p_exceed_closed_form(posterior_params(le, prior), gamma_star)
quad = p_exceed_quadrature(le, prior, gamma_star)
mc = p_exceed_monte_carlo(le, prior, gamma_star, 10**6, RandomSource(2024))
print(f"closed form : {closed:.10f}")
print(f"quadrature  : {quad:.10f}   diff {abs(closed - quad):.1e}")
print(f"monte carlo : {mc.estimate:.6f} +/- {mc.std_error:.6f}   "
      f"{abs(closed - mc.estimate) / mc.std_error:.2f} standard errors away")

# Same seed, same draws.
again = p_exceed_monte_carlo(le, prior, gamma_star, 10**6, RandomSource(2024))
print("replayed bit for bit:", again == mc)

# Prior sampling cannot see events far rarer than 1/n. The engine says so
# instead of returning a confident zero.
try:
    p_exceed_monte_carlo(LogEstimate(0.3, 0.1), PriorSpec(1.0, 0.2), 9.0, 10**5, RandomSource(4))
except UnreliableEstimateError as exc:
    print("refused:", exc)

# A small version of the cross-check run by `confound-prob verify`.
rep = verify_engines(grid_size=12, mc_points=4, mc_draws=2 * 10**5)
print(f"{rep.grid_size} random tuples: max |closed - quad| = {rep.max_quad_diff:.2e}; "
      f"MC compared on {len(rep.mc_compared)}, misses {len(rep.mc_misses)}")
