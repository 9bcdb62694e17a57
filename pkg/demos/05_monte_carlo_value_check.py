"""Confirm the closed-form cost by simulating the system.

The discounted cost of a fixed policy has an exact expression through the
value matrix. Rolling the stochastic dynamics forward many times and
averaging the discounted stage costs must land within sampling error of that
number, for any zero-mean noise law with the right covariance. Three bundled
laws are checked: Gaussian, a truncated Gaussian (bounded support), and a
uniform box, all scaled to the same covariance.
"""

from lqrnewton import initial_gain, make_pendulum, performance
from lqrnewton.oracles import monte_carlo_J

prob = make_pendulum()
gain = initial_gain(prob)
exact = performance(prob, gain)
print(f"closed-form cost J = {exact:.6g}\n")

print(f"{'noise law':>20} {'estimate':>14} {'std err':>10} {'|err|/SE':>9}")
for model in ("gaussian", "truncated_gaussian", "uniform_box"):
    est = monte_carlo_J(prob, gain, noise_model=model, samples=10_000, seed=0)
    pull = abs(est.mean - exact) / est.std_error
    print(f"{model:>20} {est.mean:14.6g} {est.std_error:10.3g} {pull:9.2f}")

est = monte_carlo_J(prob, gain, samples=10_000, seed=0)
print(f"\nhorizon chosen automatically: {est.horizon} steps "
      f"(truncation bias below 1e-6 of J)")
print("same seed, same numbers:",
      monte_carlo_J(prob, gain, samples=2000, seed=5).mean
      == monte_carlo_J(prob, gain, samples=2000, seed=5).mean)
