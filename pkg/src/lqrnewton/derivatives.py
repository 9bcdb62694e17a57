"""Closed-form derivatives of the discounted LQR performance with respect
to the policy parameters theta = vec(K): the policy gradient, the
Gauss-Newton curvature surrogate, the Jacobian of vec(P) with respect to
theta, the distribution-sensitivity term Lambda, and the exact Hessian.

Key quantities, for a stabilizing gain K with closed loop Acl = A - B K,
value matrix P and discounted state correlation Sigma:

    S      = R K - gamma * B' P Acl          (gradient kernel, m x n)
    grad   = 2 * vec(S Sigma)                (length m*n)
    H_gn   = 2 * Sigma (x) (R + gamma B'PB)  (Gauss-Newton, PD when Sigma is)
    T      = I - gamma * Acl' (x) Acl'       (n^2 x n^2 Lyapunov operator)
    jac    = T^-1 [ (S' (x) I) K_mn + (I (x) S') ]   (d vec(P) / d theta)
    Lambda = -2 [ (Sigma Acl' (x) B') jac + jac' (Acl Sigma (x) B) ]
    H      = H_gn + gamma * Lambda           (exact Hessian)

S vanishes at the optimal gain, so grad, jac and Lambda all vanish there and
the Gauss-Newton surrogate matches the exact Hessian.

Everything here is pure and thread-safe. The columns of jac are independent
of one another (column i only needs the i-th right-hand side), so callers
may compute or consume them in parallel; this implementation solves the
whole block against one factorization because the sizes are small.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import SingularT
from .linalg import commutation_matrix, kron, unvec, vec
from .lqr import Gain, LqrProblem, closed_loop, solve_sigma, solve_value

_COND_LIMIT = 1e14


@dataclass
class CurvatureReport:
    """Derivative bundle at one gain.

    Fields not needed by a caller are None (e.g. a gradient-only report).
    When assembled by :func:`exact_hessian` every field is populated,
    H_exact equals H_gn + gamma * Lambda exactly as computed, and
    ``h_exact_asym`` records the relative asymmetry of H_exact before its
    final symmetrization.
    """

    grad: np.ndarray
    S: np.ndarray
    H_gn: Optional[np.ndarray] = None
    Lambda: Optional[np.ndarray] = None
    H_exact: Optional[np.ndarray] = None
    jac_vecP: Optional[np.ndarray] = None
    T: Optional[np.ndarray] = None
    h_exact_asym: Optional[float] = None


def _pieces(prob: LqrProblem, gain: Gain):
    """Shared per-gain quantities: Acl, P, q, Sigma, S, and R + g B'PB."""
    Acl = closed_loop(prob, gain)
    P, q = solve_value(prob, gain)
    Sigma = solve_sigma(prob, gain)
    g = prob.gamma
    S = prob.R @ gain.K - g * prob.B.T @ P @ Acl
    E = prob.R + g * prob.B.T @ P @ prob.B
    E = (E + E.T) / 2.0
    return Acl, P, q, Sigma, S, E


def _grad_from(S: np.ndarray, Sigma: np.ndarray) -> np.ndarray:
    return 2.0 * vec(S @ Sigma)


def policy_gradient(prob: LqrProblem, gain: Gain) -> np.ndarray:
    """Gradient of the performance J with respect to theta = vec(K).

    Equals 2 * vec(S Sigma) with S = R K - gamma B' P Acl; a length-(m*n)
    vector ordered like vec(K). Raises NotStabilizing for gains outside the
    stabilizing set (where J is undefined).
    """
    _, _, _, Sigma, S, _ = _pieces(prob, gain)
    return _grad_from(S, Sigma)


def gn_hessian(prob: LqrProblem, gain: Gain) -> np.ndarray:
    """Gauss-Newton curvature 2 * Sigma (x) (R + gamma B'PB).

    Symmetric, and positive definite whenever Sigma is positive definite.
    Agrees with the exact Hessian at the optimal gain.
    """
    _, _, _, Sigma, _, E = _pieces(prob, gain)
    return 2.0 * kron(Sigma, E)


def _lyap_operator(Acl: np.ndarray, gamma: float) -> np.ndarray:
    n = Acl.shape[0]
    return np.eye(n * n) - gamma * kron(Acl.T, Acl.T)


def _jacobian_from(Acl: np.ndarray, S: np.ndarray, gamma: float):
    """Solve T jac = (S' (x) I) K_mn + (I (x) S') column-block at once.

    T is LU-factored (never inverted) and its conditioning is estimated via
    the factored 1-norm reciprocal condition number; a gain numerically on
    the stabilizing boundary raises SingularT.
    """
    n = Acl.shape[0]
    m = S.shape[0]
    T = _lyap_operator(Acl, gamma)
    anorm = np.linalg.norm(T, 1)
    lu, piv = scipy.linalg.lu_factor(T)
    rcond, info = scipy.linalg.lapack.dgecon(lu, anorm, norm="1")
    if info != 0 or rcond <= 0 or 1.0 / rcond > _COND_LIMIT:
        raise SingularT(
            f"Lyapunov operator condition ~{1.0 / max(rcond, 1e-300):.2e} exceeds "
            f"{_COND_LIMIT:.0e}; gain is numerically on the stabilizing boundary")
    rhs = kron(S.T, np.eye(n)) @ commutation_matrix(m, n) + kron(np.eye(n), S.T)
    jac = scipy.linalg.lu_solve((lu, piv), rhs)
    # each column is d vec(P)/d theta_i, the vec of a symmetric matrix;
    # symmetrize to remove round-off skew
    for i in range(jac.shape[1]):
        D = unvec(jac[:, i], n, n)
        jac[:, i] = vec((D + D.T) / 2.0)
    return jac, T


def jacobian_vecP(prob: LqrProblem, gain: Gain) -> np.ndarray:
    """Jacobian of vec(P) with respect to theta, shape (n^2, m*n).

    Column i is vec(dP/dtheta_i). Every column is the vec of a symmetric
    matrix, hence fixed by the commutation matrix K_nn. Vanishes at the
    optimal gain, where S = 0.
    """
    Acl, _, _, _, S, _ = _pieces(prob, gain)
    jac, _ = _jacobian_from(Acl, S, prob.gamma)
    return jac


def _lambda_from(Sigma: np.ndarray, Acl: np.ndarray, B: np.ndarray,
                 jac: np.ndarray) -> np.ndarray:
    term1 = kron(Sigma @ Acl.T, B.T) @ jac
    term2 = jac.T @ kron(Acl @ Sigma, B)
    return -2.0 * (term1 + term2)


def lambda_term(prob: LqrProblem, gain: Gain, jac: np.ndarray) -> np.ndarray:
    """Distribution-sensitivity part of the Hessian, from a precomputed jac.

    Lambda = -2 [ (Sigma Acl' (x) B') jac + jac' (Acl Sigma (x) B) ],
    symmetric by construction, zero whenever B = 0 or jac = 0 (at the
    optimum). ``jac`` must come from :func:`jacobian_vecP` at the same
    problem and gain.
    """
    mn = prob.m * prob.n
    if jac.shape != (prob.n * prob.n, mn):
        raise ValueError(
            f"jac shape {jac.shape} does not match ({prob.n * prob.n}, {mn})")
    Acl = closed_loop(prob, gain)
    Sigma = solve_sigma(prob, gain)
    return _lambda_from(Sigma, Acl, prob.B, jac)


def exact_hessian(prob: LqrProblem, gain: Gain) -> CurvatureReport:
    """Assemble the gradient, both Hessians, and their ingredients at a gain.

    H_exact = H_gn + gamma * Lambda, symmetrized after assembly; the
    pre-symmetrization relative asymmetry is recorded in ``h_exact_asym``
    (it is at round-off level by construction).
    """
    Acl, _, _, Sigma, S, E = _pieces(prob, gain)
    grad = _grad_from(S, Sigma)
    H_gn = 2.0 * kron(Sigma, E)
    jac, T = _jacobian_from(Acl, S, prob.gamma)
    Lam = _lambda_from(Sigma, Acl, prob.B, jac)
    H_raw = H_gn + prob.gamma * Lam
    denom = max(np.linalg.norm(H_raw, "fro"), np.finfo(float).tiny)
    asym = float(np.linalg.norm(H_raw - H_raw.T, "fro") / denom)
    H_exact = (H_raw + H_raw.T) / 2.0
    return CurvatureReport(grad=grad, S=S, H_gn=H_gn, Lambda=Lam,
                           H_exact=H_exact, jac_vecP=jac, T=T,
                           h_exact_asym=asym)


def gradient_report(prob: LqrProblem, gain: Gain) -> CurvatureReport:
    """Gradient-only report (cheap: two Lyapunov solves, no T factorization)."""
    _, _, _, Sigma, S, _ = _pieces(prob, gain)
    return CurvatureReport(grad=_grad_from(S, Sigma), S=S)


def gn_report(prob: LqrProblem, gain: Gain) -> CurvatureReport:
    """Gradient plus Gauss-Newton curvature, without the exact-Hessian work."""
    _, _, _, Sigma, S, E = _pieces(prob, gain)
    return CurvatureReport(grad=_grad_from(S, Sigma), S=S,
                           H_gn=2.0 * kron(Sigma, E))
