"""Convergence-rate comparison on the 48-state shear building.

Runs plain policy gradient, Gauss-Newton (fixed step 0.5), and exact Newton
(fixed step 1) from one common stabilizing gain and tabulates the policy
error ||K_k - K*||_F per iteration. Newton's error roughly squares each
step, Gauss-Newton contracts by a constant factor, and the first-order
baseline barely moves on this badly scaled objective.
"""

import numpy as np

from lqrnewton import (OptimizerConfig, initial_gain, make_shear_building,
                       optimal_gain, run)

prob = make_shear_building(seed=0)
print(f"plant: n={prob.n} states, m={prob.m} input, discount {prob.gamma}")

k_star, _ = optimal_gain(prob, tol=1e-12)
seed = initial_gain(prob, r_inflation=2.0)
print(f"starting distance ||K0 - K*||_F = {np.linalg.norm(seed.K - k_star.K):.3e}\n")

records = {}
for method, mode, alpha, iters in (("newton", "fixed", 1.0, 40),
                                   ("gauss_newton", "fixed", 0.5, 120),
                                   ("first_order", "backtracking", 1.0, 120)):
    cfg = OptimizerConfig(method=method, step_mode=mode, alpha=alpha,
                          grad_tol=1e-12, max_iter=iters, seed_gain=seed)
    records[method] = run(prob, cfg, k_star=k_star)

print(f"{'k':>4} {'newton':>12} {'gauss_newton':>14} {'first_order':>13}")
rows = max(len(r.steps) for r in records.values())
for k in range(min(rows, 16)):
    cells = []
    for m in ("newton", "gauss_newton", "first_order"):
        steps = records[m].steps
        cells.append(f"{steps[k].gain_error:.3e}" if k < len(steps) else "")
    print(f"{k:>4} {cells[0]:>12} {cells[1]:>14} {cells[2]:>13}")

print("\nsummary:")
for m, rec in records.items():
    to_tol = next((s.k for s in rec.steps if s.gain_error <= 1e-8), None)
    print(f"  {m:13s} iterations to ||K-K*|| <= 1e-8: "
          f"{to_tol if to_tol is not None else 'not reached'}")

e = records["newton"].column("gain_error")
print("\nnewton error-squaring check (e_next / e^2):",
      ", ".join(f"{e[i+1]/e[i]**2:.2g}" for i in range(len(e) - 1) if e[i] < 2.0))
g = records["gauss_newton"].column("gain_error")
ratios = [g[i + 1] / g[i] for i in range(len(g) - 1) if g[i] > 1e-9]
print(f"gauss-newton per-step contraction: {min(ratios):.3f} .. {max(ratios):.3f}")
