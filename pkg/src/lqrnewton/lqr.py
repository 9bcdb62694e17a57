"""Discounted stochastic LQR: problem container, stabilization checks,
discounted Lyapunov solvers for the value and state-correlation matrices,
performance evaluation, and the optimal gain via policy iteration.

Conventions
-----------
Dynamics are s' = A s + B a + w with zero-mean noise of covariance Sigma_w
and initial-state covariance Sigma_0. The policy is a = -K s with K of shape
(m, n); its flat parameter vector is theta = vec(K) (column-major). A gain is
gamma-stabilizing when rho(sqrt(gamma) * (A - B K)) < 1, which is exactly the
condition for the discounted sums below to converge.

All functions are pure; solver state is local to each call.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import NoConvergence, NotStabilizing
from .linalg import kron, spectral_radius, unvec, vec

# Above this state dimension the n^2 x n^2 Kronecker solve is replaced by
# a squared-iteration (doubling) evaluation of the same fixed point.
_DIRECT_SOLVE_MAX_DIM = 20
_SYM_TOL = 1e-9
_PSD_TOL = 1e-9


def _as_matrix(x, name: str) -> np.ndarray:
    a = np.atleast_2d(np.asarray(x, dtype=float))
    if a.ndim != 2:
        raise ValueError(f"{name} must be a matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def _check_symmetric(a: np.ndarray, name: str) -> np.ndarray:
    scale = 1.0 + np.linalg.norm(a, "fro")
    if np.linalg.norm(a - a.T, "fro") > _SYM_TOL * scale:
        raise ValueError(f"{name} must be symmetric")
    return (a + a.T) / 2.0


def _check_psd(a: np.ndarray, name: str) -> None:
    w = np.linalg.eigvalsh(a)
    if w.size and w[0] < -_PSD_TOL * max(1.0, abs(w[-1])):
        raise ValueError(f"{name} must be positive semidefinite (min eig {w[0]:.3e})")


def _check_pd(a: np.ndarray, name: str) -> None:
    try:
        np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        raise ValueError(f"{name} must be positive definite") from None


@dataclass(frozen=True)
class LqrProblem:
    """Discounted stochastic LQR instance.

    Fields
    ------
    A, B : system matrices, shapes (n, n) and (n, m)
    Q, R : state and input cost weights; Q symmetric PSD, R symmetric PD
    gamma : discount factor in (0, 1)
    Sigma_w : process-noise covariance, symmetric PSD, shape (n, n)
    Sigma_0 : initial-state covariance, symmetric PSD, shape (n, n)

    Symmetric inputs are re-symmetrized on construction so that downstream
    algebra preserves symmetry exactly. Scalars are accepted for 1x1 blocks.
    """

    A: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    gamma: float
    Sigma_w: np.ndarray
    Sigma_0: np.ndarray

    def __post_init__(self):
        A = _as_matrix(self.A, "A")
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"A must be square, got {A.shape}")
        B = _as_matrix(self.B, "B")
        if B.shape[0] != n:
            raise ValueError(f"B must have {n} rows, got {B.shape}")
        Q = _check_symmetric(_as_matrix(self.Q, "Q"), "Q")
        R = _check_symmetric(_as_matrix(self.R, "R"), "R")
        m = B.shape[1]
        if Q.shape != (n, n):
            raise ValueError(f"Q must be {n}x{n}, got {Q.shape}")
        if R.shape != (m, m):
            raise ValueError(f"R must be {m}x{m}, got {R.shape}")
        Sw = _check_symmetric(_as_matrix(self.Sigma_w, "Sigma_w"), "Sigma_w")
        S0 = _check_symmetric(_as_matrix(self.Sigma_0, "Sigma_0"), "Sigma_0")
        if Sw.shape != (n, n) or S0.shape != (n, n):
            raise ValueError("Sigma_w and Sigma_0 must be n x n")
        _check_psd(Q, "Q")
        _check_pd(R, "R")
        _check_psd(Sw, "Sigma_w")
        _check_psd(S0, "Sigma_0")
        gamma = float(self.gamma)
        if not 0.0 < gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
        for name, val in (("A", A), ("B", B), ("Q", Q), ("R", R),
                          ("gamma", gamma), ("Sigma_w", Sw), ("Sigma_0", S0)):
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]


@dataclass(frozen=True)
class Gain:
    """Linear state-feedback gain K (policy a = -K s) with theta = vec(K)."""

    K: np.ndarray

    def __post_init__(self):
        K = _as_matrix(self.K, "K")
        object.__setattr__(self, "K", K)

    @property
    def theta(self) -> np.ndarray:
        return vec(self.K)

    @property
    def m(self) -> int:
        return self.K.shape[0]

    @property
    def n(self) -> int:
        return self.K.shape[1]

    @classmethod
    def from_theta(cls, theta: np.ndarray, m: int, n: int) -> "Gain":
        return cls(unvec(theta, m, n))

    @classmethod
    def zero(cls, prob: LqrProblem) -> "Gain":
        return cls(np.zeros((prob.m, prob.n)))


class ValueSolution(NamedTuple):
    """Quadratic value function V(s) = s' P s + q for a fixed gain."""

    P: np.ndarray
    q: float


def closed_loop(prob: LqrProblem, gain: Gain) -> np.ndarray:
    """Closed-loop matrix A - B K."""
    if gain.K.shape != (prob.m, prob.n):
        raise ValueError(
            f"gain shape {gain.K.shape} does not match problem ({prob.m}, {prob.n})")
    return prob.A - prob.B @ gain.K


def is_gamma_stabilizing(prob: LqrProblem, gain: Gain,
                         margin_tol: float = 0.0) -> tuple[bool, float]:
    """Check rho(sqrt(gamma) * (A - B K)) < 1 - margin_tol.

    Returns (stabilizing, margin) where margin = 1 - rho. A positive margin
    means the discounted closed-loop sums converge.
    """
    rho = spectral_radius(np.sqrt(prob.gamma) * closed_loop(prob, gain))
    return rho < 1.0 - margin_tol, 1.0 - rho


def _require_stabilizing(prob: LqrProblem, gain: Gain, what: str) -> None:
    ok, margin = is_gamma_stabilizing(prob, gain)
    if not ok:
        raise NotStabilizing(
            f"{what} requires a gamma-stabilizing gain "
            f"(rho(sqrt(gamma)*Acl) = {1.0 - margin:.6f} >= 1)")


def _stein_solve(G: np.ndarray, M: np.ndarray, gamma: float) -> np.ndarray:
    """Solve X = M + gamma * G X G' for symmetric M with gamma*rho(G)^2 < 1.

    For small dimensions this is a direct linear solve of the vectorized
    system (I - gamma * G (x) G) vec(X) = vec(M), refined once with the
    computed residual. Larger systems use the squared-iteration form of the
    same geometric series (F <- F @ F doubles the number of accumulated
    terms per step), stopping when the increment falls below 1e-15 relative.
    """
    n = G.shape[0]
    if n <= _DIRECT_SOLVE_MAX_DIM:
        T = np.eye(n * n) - gamma * kron(G, G)
        X = unvec(np.linalg.solve(T, vec(M)), n, n)
        # one refinement pass keeps the residual near round-off
        resid = M + gamma * G @ X @ G.T - X
        X = X + unvec(np.linalg.solve(T, vec(resid)), n, n)
        return (X + X.T) / 2.0
    X = M.copy()
    F = np.sqrt(gamma) * G
    for _ in range(100):
        delta = F @ X @ F.T
        X = X + delta
        F = F @ F
        if np.linalg.norm(delta, "fro") <= 1e-15 * max(1.0, np.linalg.norm(X, "fro")):
            return (X + X.T) / 2.0
    raise NoConvergence("discounted Lyapunov doubling iteration did not converge")


def solve_value(prob: LqrProblem, gain: Gain) -> ValueSolution:
    """Value matrix P and offset q for a gamma-stabilizing gain.

    P is the fixed point of P = Q + K' R K + gamma * Acl' P Acl and
    q = gamma / (1 - gamma) * tr(P Sigma_w). The returned P is symmetrized
    and satisfies the fixed point to within ~1e-10 * (1 + ||P||_F).
    """
    _require_stabilizing(prob, gain, "solve_value")
    Acl = closed_loop(prob, gain)
    M = prob.Q + gain.K.T @ prob.R @ gain.K
    M = (M + M.T) / 2.0
    P = _stein_solve(Acl.T, M, prob.gamma)
    q = prob.gamma / (1.0 - prob.gamma) * float(np.trace(P @ prob.Sigma_w))
    return ValueSolution(P, q)


def solve_sigma(prob: LqrProblem, gain: Gain) -> np.ndarray:
    """Discounted state correlation matrix Sigma for a stabilizing gain.

    Solves Sigma - gamma * Acl Sigma Acl' = Sigma_0 + gamma/(1-gamma) * Sigma_w.
    The result is symmetric PSD (up to round-off) and satisfies the equation
    to within ~1e-10 * (1 + ||Sigma||_F).
    """
    _require_stabilizing(prob, gain, "solve_sigma")
    Acl = closed_loop(prob, gain)
    M = prob.Sigma_0 + prob.gamma / (1.0 - prob.gamma) * prob.Sigma_w
    return _stein_solve(Acl, M, prob.gamma)


def performance(prob: LqrProblem, gain: Gain) -> float:
    """Expected discounted cost J = tr(P Sigma_0) + q under the gain's policy."""
    P, q = solve_value(prob, gain)
    return float(np.trace(P @ prob.Sigma_0)) + q


def value_at(sol: ValueSolution, s: np.ndarray) -> float:
    """Evaluate V(s) = s' P s + q."""
    s = np.asarray(s, dtype=float).ravel()
    if s.size != sol.P.shape[0]:
        raise ValueError(f"state length {s.size} does not match P {sol.P.shape}")
    return float(s @ sol.P @ s) + sol.q


def action_value_at(prob: LqrProblem, sol: ValueSolution,
                    s: np.ndarray, a: np.ndarray) -> float:
    """Evaluate the action-value of (s, a) under the gain that produced sol.

    Q(s, a) = s'(Q + gamma A' P A)s + 2 gamma s' A' P B a
              + a'(R + gamma B' P B)a + q,
    which agrees with value_at(sol, s) at the policy action a = -K s.
    """
    s = np.asarray(s, dtype=float).ravel()
    a = np.asarray(a, dtype=float).ravel()
    if s.size != prob.n or a.size != prob.m:
        raise ValueError("state/action dimensions do not match the problem")
    g, A, B, P = prob.gamma, prob.A, prob.B, sol.P
    quad_s = float(s @ (prob.Q + g * A.T @ P @ A) @ s)
    cross = 2.0 * g * float(s @ A.T @ P @ B @ a)
    quad_a = float(a @ (prob.R + g * B.T @ P @ B) @ a)
    return quad_s + cross + quad_a + sol.q


def _policy_improve(prob: LqrProblem, P: np.ndarray) -> np.ndarray:
    """One policy-improvement step: K = (R + g B'PB)^-1 g B'PA."""
    g, B = prob.gamma, prob.B
    return np.linalg.solve(prob.R + g * B.T @ P @ B, g * B.T @ P @ prob.A)


def _policy_iteration(prob: LqrProblem, K: np.ndarray,
                      tol: float, max_iter: int) -> np.ndarray:
    for _ in range(max_iter):
        P, _ = solve_value(prob, Gain(K))
        K_new = _policy_improve(prob, P)
        delta = np.linalg.norm(K_new - K, "fro")
        K = K_new
        if delta <= tol * (1.0 + np.linalg.norm(K, "fro")):
            return K
    raise NoConvergence(
        f"policy iteration did not converge in {max_iter} iterations "
        f"(non-stabilizable pair or too tight a tolerance?)")


def optimal_gain(prob: LqrProblem, tol: float = 1e-10, max_iter: int = 200,
                 seed_gain: Optional[Gain] = None) -> tuple[Gain, ValueSolution]:
    """Optimal gain K* = (R + g B'P*B)^-1 g B'P*A via policy iteration.

    Alternates value solves with the improvement map until the gain change
    drops below tol (relative). If the starting gain (zero, or seed_gain)
    is not gamma-stabilizing, the discount is halved until it is and the
    solution is continued back up to the target discount, exploiting that
    any gain stabilizes for a small enough discount.

    Raises NoConvergence when no stabilizing discount path exists (e.g.
    B = 0 with an unstable A) or the iteration cap is hit.
    """
    K = seed_gain.K.copy() if seed_gain is not None else np.zeros((prob.m, prob.n))
    if K.shape != (prob.m, prob.n):
        raise ValueError("seed_gain shape does not match the problem")

    target = prob.gamma
    g = target
    rho_cl = spectral_radius(prob.A - prob.B @ K)
    for _ in range(128):
        if np.sqrt(g) * rho_cl < 1.0:
            break
        g /= 2.0
    else:
        raise NoConvergence("could not find a stabilizing starting discount")

    def at_discount(gam: float) -> LqrProblem:
        if gam == target:
            return prob
        return LqrProblem(prob.A, prob.B, prob.Q, prob.R, gam,
                          prob.Sigma_w, prob.Sigma_0)

    for _ in range(256):
        sub = at_discount(g)
        K = _policy_iteration(sub, K, tol, max_iter)
        if g == target:
            break
        g_next = min(target, 2.0 * g)
        rho_cl = spectral_radius(prob.A - prob.B @ K)
        for _ in range(200):
            if np.sqrt(g_next) * rho_cl < 1.0:
                break
            g_next = 0.5 * (g + g_next)
        else:
            raise NoConvergence("discount homotopy stalled; pair may not be stabilizable")
        if g_next - g <= 1e-12 * target:
            raise NoConvergence(
                "discount homotopy cannot reach the target discount; "
                "the pair (A, B) appears not to be gamma-stabilizable")
        g = g_next
    else:
        raise NoConvergence("discount homotopy did not reach the target discount")

    best = Gain(K)
    return best, solve_value(prob, best)
