import logging

import numpy as np
import scipy.linalg

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-9


class ClfError(ValueError):
    pass


def care_residual(F: np.ndarray, G: np.ndarray, Q: np.ndarray, P: np.ndarray) -> float:
    return float(np.max(np.abs(F.T @ P + P @ F - P @ G @ G.T @ P + Q)))


def is_stabilizable(F: np.ndarray, G: np.ndarray, tol: float = 1e-9) -> bool:
    """PBH test on the eigenvalues with non-negative real part."""
    n = F.shape[0]
    for lam in np.linalg.eigvals(F):
        if lam.real >= -tol and np.linalg.matrix_rank(np.hstack([F - lam * np.eye(n), G]), tol=1e-8) < n:
            return False
    return True


def solve_care(F: np.ndarray, G: np.ndarray, Q: np.ndarray, refine_steps: int = 5) -> np.ndarray:
    """P = P^T > 0 with F^T P + P F - P G G^T P + Q = 0 (R = I).

    The Schur-method solution is polished with Newton-Kleinman steps
    (one Lyapunov solve each) while the residual keeps dropping.
    """
    F, G, Q = (np.atleast_2d(np.asarray(a, dtype=float)) for a in (F, G, Q))
    n = F.shape[0]
    if F.shape != (n, n) or G.shape[0] != n or Q.shape != (n, n):
        raise ClfError(f"inconsistent shapes F {F.shape}, G {G.shape}, Q {Q.shape}")
    if not np.allclose(Q, Q.T) or np.linalg.eigvalsh(0.5 * (Q + Q.T)).min() <= 0:
        raise ClfError("Q must be symmetric positive definite")
    if not is_stabilizable(F, G):
        raise ClfError("(F, G) is not stabilizable")

    P = scipy.linalg.solve_continuous_are(F, G, Q, np.eye(G.shape[1]))
    P = 0.5 * (P + P.T)
    residual = care_residual(F, G, Q, P)
    for _ in range(refine_steps):
        if residual < 1e-14:
            break
        K = G.T @ P
        Acl = F - G @ K
        candidate = scipy.linalg.solve_continuous_lyapunov(Acl.T, -(Q + K.T @ K))
        candidate = 0.5 * (candidate + candidate.T)
        r = care_residual(F, G, Q, candidate)
        if r >= residual:
            break
        logger.debug("CARE refinement: residual %.3e -> %.3e", residual, r)
        P, residual = candidate, r

    if residual >= RESIDUAL_TOL:
        raise ClfError(f"CARE residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}")
    if np.linalg.eigvalsh(P).min() <= 0:
        raise ClfError("CARE solution is not positive definite")
    return P
