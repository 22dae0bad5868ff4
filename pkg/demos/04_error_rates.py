"""
Type I error and power
======================

Analytic rates against a quick simulation.  Increase ``n_sims`` (or run
``repsuccess mc-check``) for the full comparison.
"""
from repsuccess.frequentist import METHODS, SamplingHypothesis, monte_carlo_rate, prob_success, type1_error

for gamma in (1 / 3, 1 / 10):
    print(f"\ntype I error, gamma = 1/{1 / gamma:.0f}")
    for method in METHODS:
        rates = [type1_error(method, gamma, c).probability for c in (0.5, 1, 2, 4, 8)]
        print(f"  {method:15s}", " ".join(f"{r:.2e}" for r in rates))

# power conditional on the original estimate being the truth
z_o, c = 2.5, 2.0
hyp = SamplingHypothesis.conditional(z_o, c)
for method in METHODS:
    exact = prob_success(method, z_o, c, 1 / 3, hyp).probability
    sim = monte_carlo_rate(method, 1 / 3, c, "conditional", 200_000, seed=1, z_o=z_o)
    print(f"{method:15s} analytic {exact:.4f}  simulated {sim.probability:.4f} +/- {sim.mc_std_error:.4f}")
