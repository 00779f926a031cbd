"""Primal active-set solver for small dense convex QPs.

Bounds are turned into inequality rows (or equality rows when lb == ub).
Each iteration minimizes over the null space of the working set; the reduced
Hessian is factored with Cholesky after adding ``regularization * I`` and the
solve is refined against the unregularized matrix. The problems are tiny, so
the factorization is recomputed whenever the working set changes.

Only constraints independent of the working set are added, and the
constraint with the lowest index is dropped among those with negative
multipliers (Bland's rule), which rules out cycling on degenerate vertices.
An infeasible start goes through a phase-1 problem with one extra slack.
"""

import bisect
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from core.types import QpStatus
from qp.types import KKT_TOL, QpProblem, QpSolution, kkt_residuals

logger = logging.getLogger(__name__)

PHASE1_WEIGHT = 1e-6
PHASE1_ROUNDS = 4
REFINE_STEPS = 2
INDEPENDENCE_TOL = 1e-10


@dataclass
class _StandardForm:
    E: np.ndarray
    e: np.ndarray
    C: np.ndarray
    d: np.ndarray
    eq_source: list[tuple[str, int]]  # ("eq", row) or ("fix", variable)
    ineq_source: list[tuple[str, int]]  # ("ineq", row), ("ub", variable) or ("lb", variable)


def _standard_form(p: QpProblem) -> _StandardForm:
    n = p.n
    E_rows, e_vals, eq_src = list(p.A_eq), list(p.b_eq), [("eq", i) for i in range(p.A_eq.shape[0])]
    C_rows, d_vals, in_src = list(p.A_ineq), list(p.b_ineq), [("ineq", i) for i in range(p.A_ineq.shape[0])]
    for j in range(n):
        unit = np.zeros(n)
        unit[j] = 1.0
        if np.isfinite(p.lb[j]) and p.lb[j] == p.ub[j]:
            E_rows.append(unit)
            e_vals.append(p.lb[j])
            eq_src.append(("fix", j))
            continue
        if np.isfinite(p.ub[j]):
            C_rows.append(unit)
            d_vals.append(p.ub[j])
            in_src.append(("ub", j))
        if np.isfinite(p.lb[j]):
            C_rows.append(-unit)
            d_vals.append(-p.lb[j])
            in_src.append(("lb", j))
    return _StandardForm(
        E=np.array(E_rows).reshape(-1, n),
        e=np.array(e_vals, dtype=float),
        C=np.array(C_rows).reshape(-1, n),
        d=np.array(d_vals, dtype=float),
        eq_source=eq_src,
        ineq_source=in_src,
    )


class ActiveSetSolver:
    """Holds the factorization workspace and the last working set for warm starts."""

    def __init__(self, max_iter: int = 200, regularization: float = 1e-8, tolerance: float = 1e-9):
        self.max_iter = max_iter
        self.regularization = regularization
        self.tolerance = tolerance
        self.last_active: tuple[int, ...] = ()


    # --- linear algebra ---------------------------------------------------

    def _reduced_step(self, H: np.ndarray, grad: np.ndarray, A: np.ndarray) -> np.ndarray:
        """Step p of min 0.5 p^T H p + grad^T p s.t. A p = 0."""
        Z = scipy.linalg.null_space(A) if A.shape[0] else np.eye(H.shape[0])
        if Z.shape[1] == 0:
            return np.zeros(H.shape[0])
        M = Z.T @ H @ Z
        rhs = -Z.T @ grad
        cho = scipy.linalg.cho_factor(M + self.regularization * np.eye(M.shape[0]))
        y = scipy.linalg.cho_solve(cho, rhs)
        for _ in range(REFINE_STEPS):
            y = y + scipy.linalg.cho_solve(cho, rhs - M @ y)
        return Z @ y

    @staticmethod
    def _multipliers(A: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if A.shape[0] == 0:
            return np.zeros(0)
        mu, *_ = np.linalg.lstsq(A.T, -grad, rcond=None)
        return mu

    @staticmethod
    def _project(x: np.ndarray, A: np.ndarray, b: np.ndarray) -> np.ndarray:
        if A.shape[0] == 0:
            return x
        dx, *_ = np.linalg.lstsq(A, A @ x - b, rcond=None)
        return x - dx

    # --- core iteration -----------------------------------------------------

    def _iterate(self, H, g, E, C, d, x, W: list[int]) -> tuple[np.ndarray, list[int], np.ndarray, np.ndarray, int, bool]:
        k = E.shape[0]
        mu = np.zeros(k + len(W))
        minimized = False
        for it in range(1, self.max_iter + 1):
            A = np.vstack([E, C[W]]) if W else E
            grad = H @ x + g
            if not minimized:
                p = self._reduced_step(H, grad, A)
                p_norm = float(np.max(np.abs(p), initial=0.0))
                minimized = p_norm <= self.tolerance * (1.0 + np.max(np.abs(x), initial=0.0))
            if minimized:
                mu = self._multipliers(A, grad)
                mu_w = mu[k:]
                threshold = -self.tolerance * (1.0 + np.max(np.abs(grad), initial=0.0))
                negative = np.flatnonzero(mu_w < threshold)
                if negative.size == 0:
                    return x, W, mu[:k], mu_w, it, True
                W.pop(int(negative[0]))
                minimized = False
                continue

            Cp = C @ p
            row_norms = np.linalg.norm(C, axis=1)
            candidates = Cp > INDEPENDENCE_TOL * row_norms * p_norm
            candidates[W] = False
            alpha, block = 1.0, None
            if np.any(candidates):
                ratios = np.full(C.shape[0], np.inf)
                ratios[candidates] = np.maximum(d[candidates] - C[candidates] @ x, 0.0) / Cp[candidates]
                smallest = float(ratios.min())
                if smallest < 1.0:
                    alpha = smallest
                    block = int(np.flatnonzero(ratios <= smallest * (1.0 + 1e-12) + 1e-15)[0])
            x = x + alpha * p
            if block is None:
                minimized = True
            else:
                bisect.insort(W, block)
        return x, W, mu[:k], mu[k:], self.max_iter, False

    def _phase1(self, sf: _StandardForm, x_hat: np.ndarray) -> tuple[np.ndarray | None, int]:
        """Find x with E x = e, C x <= d starting from x_hat, or None.

        The proximity term keeps the slack problem strictly convex; re-centring
        on the previous answer removes its pull so a feasible problem ends with
        zero slack.
        """
        n = x_hat.shape[0]
        m = sf.C.shape[0]
        E1 = np.hstack([sf.E, np.zeros((sf.E.shape[0], 1))])
        C1 = np.vstack([np.hstack([sf.C, -np.ones((m, 1))]), np.concatenate([np.zeros(n), [-1.0]])])
        d1 = np.concatenate([sf.d, [0.0]])
        H1 = PHASE1_WEIGHT * np.eye(n + 1)
        scale = 1.0 + np.max(np.abs(sf.d), initial=0.0)
        total = 0
        x = x_hat
        for _ in range(PHASE1_ROUNDS):
            t0 = max(0.0, float(np.max(sf.C @ x - sf.d, initial=0.0)))
            g1 = np.concatenate([-PHASE1_WEIGHT * x, [1.0]])
            z, _, _, _, iters, _ = self._iterate(H1, g1, E1, C1, d1, np.concatenate([x, [t0]]), [])
            total += iters
            x = z[:n]
            if np.max(sf.C @ x - sf.d, initial=0.0) <= self.tolerance * scale:
                return x, total
        return None, total

    # --- public -------------------------------------------------------------

    def solve(self, problem: QpProblem, warm_start: np.ndarray | None = None) -> QpSolution:
        sf = _standard_form(problem)
        n = problem.n
        H = 0.5 * (problem.H + problem.H.T)
        tol = self.tolerance

        x = np.zeros(n) if warm_start is None else np.asarray(warm_start, dtype=float).copy()
        x = self._project(x, sf.E, sf.e)
        eq_scale = 1.0 + np.max(np.abs(sf.e), initial=0.0)
        if np.max(np.abs(sf.E @ x - sf.e), initial=0.0) > 1e-8 * eq_scale:
            logger.debug("inconsistent equality constraints")
            return self._infeasible(problem, x, 0)

        W: list[int] = []
        if warm_start is not None and self.last_active:
            seed = sorted(i for i in self.last_active if i < sf.C.shape[0])
            A = np.vstack([sf.E, sf.C[seed]])
            candidate = self._project(x, A, np.concatenate([sf.e, sf.d[seed]]))
            independent = np.linalg.matrix_rank(A) == np.linalg.matrix_rank(sf.E) + len(seed)
            if independent and np.all(sf.C @ candidate - sf.d <= tol * (1.0 + np.abs(sf.d))):
                x, W = candidate, seed

        iterations = 0
        if np.any(sf.C @ x - sf.d > tol * (1.0 + np.abs(sf.d))):
            x1, iterations = self._phase1(sf, x)
            if x1 is None:
                return self._infeasible(problem, x, iterations)
            x = x1
            W = []

        x, W, mu_eq, mu_w, iters, converged = self._iterate(H, problem.g, sf.E, sf.C, sf.d, x, W)
        iterations += iters
        self.last_active = tuple(W)
        solution = self._assemble(problem, sf, x, W, mu_eq, mu_w, iterations)
        if not converged:
            solution.status = QpStatus.MAX_ITER
            logger.warning("QP hit the iteration cap (%d)", self.max_iter)
        elif max(solution.stationarity, solution.primal, solution.complementarity) >= KKT_TOL:
            solution.status = QpStatus.MAX_ITER
            logger.warning(
                "QP converged with KKT residuals %.2e/%.2e/%.2e above tolerance",
                solution.stationarity,
                solution.primal,
                solution.complementarity,
            )
        return solution

    def _assemble(self, problem, sf, x, W, mu_eq, mu_w, iterations) -> QpSolution:
        n = problem.n
        y_eq = np.zeros(problem.A_eq.shape[0])
        z_ineq = np.zeros(problem.A_ineq.shape[0])
        z_lb, z_ub = np.zeros(n), np.zeros(n)
        for (kind, i), mu in zip(sf.eq_source, mu_eq, strict=True):
            if kind == "eq":
                y_eq[i] = mu
            elif mu >= 0:
                z_ub[i] = mu
            else:
                z_lb[i] = -mu
        for row, mu in zip(W, mu_w, strict=True):
            kind, i = sf.ineq_source[row]
            if kind == "ineq":
                z_ineq[i] = mu
            elif kind == "ub":
                z_ub[i] = mu
            else:
                z_lb[i] = mu
        stat, primal, comp = kkt_residuals(problem, x, y_eq, z_ineq, z_lb, z_ub)
        return QpSolution(
            x=x,
            status=QpStatus.OPTIMAL,
            y_eq=y_eq,
            z_ineq=z_ineq,
            z_lb=z_lb,
            z_ub=z_ub,
            stationarity=stat,
            primal=primal,
            complementarity=comp,
            iterations=iterations,
            active=tuple(W),
        )

    def _infeasible(self, problem: QpProblem, x: np.ndarray, iterations: int) -> QpSolution:
        self.last_active = ()
        _, primal, _ = kkt_residuals(
            problem, x, np.zeros(problem.A_eq.shape[0]), np.zeros(problem.A_ineq.shape[0]), np.zeros(problem.n), np.zeros(problem.n)
        )
        return QpSolution(x=x, status=QpStatus.INFEASIBLE, primal=primal, iterations=iterations)


def solve_qp(problem: QpProblem, warm_start: np.ndarray | None = None, solver: ActiveSetSolver | None = None) -> QpSolution:
    return (solver or ActiveSetSolver()).solve(problem, warm_start)
