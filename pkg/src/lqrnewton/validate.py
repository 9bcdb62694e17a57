"""Built-in cross-validation suite behind the `validate` CLI command.

Each check pits a closed-form computation against an independent oracle
(scalar closed forms, finite differences, the term-by-term moment series,
the columnwise Lambda assembly, or Monte Carlo rollouts) on deterministic
fixtures, and reports pass/fail with the observed error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lqr import (Gain, LqrProblem, is_gamma_stabilizing, optimal_gain,
                  performance, solve_sigma)
from .derivatives import exact_hessian, jacobian_vecP, lambda_term, policy_gradient
from .oracles import (discounted_moment_series, fd_gradient, fd_hessian,
                      lambda_via_Mi, monte_carlo_J, scalar_reference)
from .benchmarks import make_pendulum


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_stabilizing_instance(seed: int, n: int = None, m: int = None,
                                min_grad: float = 1e-2):
    """Deterministic random problem plus an interior stabilizing gain.

    The gain is the optimal gain perturbed away from the optimum until the
    gradient is visible (>= min_grad) while keeping a comfortable stability
    margin, so finite-difference probes stay inside the stabilizing set.
    """
    rng = np.random.default_rng(seed)
    if n is None:
        n = int(rng.integers(1, 5))
    if m is None:
        m = int(rng.integers(1, 3))
    A = rng.standard_normal((n, n))
    rho = max(np.abs(np.linalg.eigvals(A)).max(), 1e-6)
    A *= rng.uniform(0.5, 1.2) / rho
    B = rng.standard_normal((n, m))
    G = rng.standard_normal((n, n))
    Q = G.T @ G / n
    Hm = rng.standard_normal((m, m))
    R = Hm.T @ Hm / m + 0.1 * np.eye(m)
    W = rng.standard_normal((n, n))
    Sigma_w = 0.1 * W.T @ W / n
    V = rng.standard_normal((n, n))
    Sigma_0 = V.T @ V / n + 0.1 * np.eye(n)
    gamma = float(rng.uniform(0.7, 0.95))
    prob = LqrProblem(A=A, B=B, Q=Q, R=R, gamma=gamma,
                      Sigma_w=Sigma_w, Sigma_0=Sigma_0)
    k_star, _ = optimal_gain(prob)
    scale = 0.1
    for _ in range(60):
        K = k_star.K + scale * rng.standard_normal((m, n))
        gain = Gain(K)
        ok, margin = is_gamma_stabilizing(prob, gain)
        if ok and margin > 0.05 and np.linalg.norm(policy_gradient(prob, gain)) >= min_grad:
            return prob, gain
        scale *= 0.8
    return prob, k_star


def _rel(err: float, ref: float) -> float:
    return err / max(ref, np.finfo(float).tiny)


def check_scalar_grid(points: int = 50, tol: float = 1e-12) -> CheckResult:
    """Library derivatives on 1x1 matrices vs the scalar closed forms."""
    a = b = 1.0
    Q = R = 0.5
    gamma = 0.9
    s0_sq, s_sq = 1.0, 0.2
    prob = LqrProblem(A=[[a]], B=[[b]], Q=[[Q]], R=[[R]], gamma=gamma,
                      Sigma_w=[[s_sq]], Sigma_0=[[s0_sq]])
    thetas = np.linspace(-0.04, 2.04, points)
    worst = 0.0
    for theta in thetas:
        ref = scalar_reference(a, b, Q, R, gamma, s0_sq, s_sq, theta)
        gain = Gain([[theta]])
        rep = exact_hessian(prob, gain)
        vals = (rep.grad[0], rep.H_gn[0, 0], rep.Lambda[0, 0], rep.H_exact[0, 0],
                rep.jac_vecP[0, 0])
        refs = (ref.grad, ref.h_gn, ref.lam, ref.hess_exact, ref.dp_dtheta)
        for got, want in zip(vals, refs):
            worst = max(worst, _rel(abs(got - want), abs(want)))
    return CheckResult("scalar closed forms (50-point grid)", worst <= tol,
                       f"max rel err {worst:.3e} (tol {tol:.0e})")


def check_fd_gradient(seeds=range(5), tol: float = 1e-6) -> CheckResult:
    worst = 0.0
    for seed in seeds:
        prob, gain = random_stabilizing_instance(seed)
        g = policy_gradient(prob, gain)
        fd = fd_gradient(prob, gain)
        worst = max(worst, _rel(np.linalg.norm(g - fd), np.linalg.norm(fd)))
    return CheckResult("gradient vs central differences", worst <= tol,
                       f"max rel err {worst:.3e} (tol {tol:.0e})")


def check_fd_hessian(seeds=range(3), tol: float = 1e-4) -> CheckResult:
    worst = 0.0
    for seed in seeds:
        prob, gain = random_stabilizing_instance(seed)
        H = exact_hessian(prob, gain).H_exact
        fd = fd_hessian(prob, gain)
        worst = max(worst, _rel(np.linalg.norm(H - fd, "fro"),
                                np.linalg.norm(fd, "fro")))
    return CheckResult("exact Hessian vs central differences", worst <= tol,
                       f"max rel err {worst:.3e} (tol {tol:.0e})")


def check_lambda_paths(seeds=range(5), tol: float = 1e-10) -> CheckResult:
    worst = 0.0
    for seed in seeds:
        prob, gain = random_stabilizing_instance(seed)
        jac = jacobian_vecP(prob, gain)
        direct = lambda_term(prob, gain, jac)
        columnwise = lambda_via_Mi(prob, gain)
        worst = max(worst, _rel(np.linalg.norm(direct - columnwise, "fro"),
                                np.linalg.norm(direct, "fro")))
    return CheckResult("Lambda direct vs columnwise assembly", worst <= tol,
                       f"max rel err {worst:.3e} (tol {tol:.0e})")


def check_moment_series(seeds=range(5), tol: float = 1e-8) -> CheckResult:
    worst = 0.0
    for seed in seeds:
        prob, gain = random_stabilizing_instance(seed)
        solved = solve_sigma(prob, gain)
        series = discounted_moment_series(prob, gain)
        worst = max(worst, _rel(np.linalg.norm(solved - series, "fro"),
                                np.linalg.norm(series, "fro")))
    return CheckResult("correlation solver vs moment series", worst <= tol,
                       f"max rel err {worst:.3e} (tol {tol:.0e})")


def check_optimum_identities(seeds=range(2), tol: float = 1e-8) -> CheckResult:
    worst_grad, worst_lam = 0.0, 0.0
    for seed in seeds:
        prob, _ = random_stabilizing_instance(seed)
        k_star, _ = optimal_gain(prob, tol=1e-12)
        rep = exact_hessian(prob, k_star)
        worst_grad = max(worst_grad, float(np.linalg.norm(rep.grad)))
        worst_lam = max(worst_lam, _rel(np.linalg.norm(rep.Lambda, "fro"),
                                        np.linalg.norm(rep.H_gn, "fro")))
    ok = worst_grad <= tol and worst_lam <= tol
    return CheckResult("optimum identities (grad = 0, Lambda = 0)", ok,
                       f"grad norm {worst_grad:.3e}, rel Lambda {worst_lam:.3e}")


def check_monte_carlo(samples: int = 2000, seed: int = 0) -> CheckResult:
    prob = make_pendulum()
    from .benchmarks import initial_gain
    gain = initial_gain(prob)
    est = monte_carlo_J(prob, gain, samples=samples, seed=seed)
    exact = performance(prob, gain)
    err = abs(est.mean - exact)
    ok = err <= 3.0 * est.std_error
    return CheckResult("Monte Carlo vs closed-form cost", ok,
                       f"|mc - exact| = {err:.4g} vs 3*SE = {3 * est.std_error:.4g}")


ALL_CHECKS = (check_scalar_grid, check_fd_gradient, check_fd_hessian,
              check_lambda_paths, check_moment_series,
              check_optimum_identities, check_monte_carlo)


def run_all() -> list[CheckResult]:
    return [check() for check in ALL_CHECKS]
