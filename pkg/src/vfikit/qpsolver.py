"""Dense strictly-convex quadratic programming with inequality constraints.

Solves ``min 0.5 x'Hx + f'x  s.t.  Wx <= w`` for symmetric positive definite
``H`` using a dual active-set method: start at the unconstrained optimum and
add violated constraints one at a time, taking partial (dual) steps and
dropping blocking constraints as needed.  The method needs no feasible
starting point, terminates finitely and is fully deterministic, which the
control loop relies on for reproducible simulations.

Problems here are small (a dozen variables, a few dozen rows), so every
subproblem is solved with dense linear algebra instead of factorization
updates.
"""

from dataclasses import dataclass, field

import numpy as np

# Slack below which a constraint counts as satisfied, and the dual/step
# tolerances of the active-set loop.  Benchmark problems are scaled around
# unity, so absolute tolerances are adequate.
SLACK_TOL = 1e-11
STEP_TOL = 1e-13


@dataclass
class QpProblem:
    """Quadratic program min 0.5 x'Hx + f'x subject to Wx <= w."""

    hessian: np.ndarray
    linear: np.ndarray
    w_matrix: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    w_vector: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.hessian = np.asarray(self.hessian, dtype=float)
        self.linear = np.asarray(self.linear, dtype=float)
        n = self.linear.shape[0]
        if self.hessian.shape != (n, n):
            raise ValueError("hessian shape does not match the linear term")
        self.w_matrix = np.asarray(self.w_matrix, dtype=float).reshape(-1, n) \
            if np.size(self.w_matrix) else np.zeros((0, n))
        self.w_vector = np.asarray(self.w_vector, dtype=float).reshape(-1)
        if self.w_matrix.shape[0] != self.w_vector.shape[0]:
            raise ValueError("constraint matrix and bound vector disagree on row count")
        if not np.all(np.isfinite(self.hessian)) or not np.all(np.isfinite(self.linear)) \
                or not np.all(np.isfinite(self.w_matrix)) or not np.all(np.isfinite(self.w_vector)):
            raise ValueError("QP data must be finite")


@dataclass
class QpSolution:
    x: np.ndarray
    multipliers: np.ndarray
    feasible: bool
    iterations: int


def solve_qp(problem: QpProblem, max_iterations: int | None = None) -> QpSolution:
    """Solve a strictly convex inequality-constrained QP.

    Returns the optimum with its KKT multipliers.  ``feasible`` is False when
    the constraints are inconsistent (or the iteration cap was hit); ``x`` is
    then the last iterate and callers are expected to fall back safely.
    """
    h = problem.hessian
    f = problem.linear
    wm = problem.w_matrix
    wv = problem.w_vector
    n = f.shape[0]
    m = wm.shape[0]

    h_inv = np.linalg.inv(h)
    x = -h_inv @ f
    lambdas = np.zeros(m)
    if m == 0:
        return QpSolution(x, lambdas, True, 0)

    # >=-form normals: n_i = -W_i, b_i = -w_i, slack s_i = w_i - W_i x
    active: list[int] = []
    u: list[float] = []
    cap = max_iterations if max_iterations is not None else 50 * (m + 1)
    iters = 0

    while iters < cap:
        iters += 1
        slack = wv - wm @ x
        p = int(np.argmin(slack))
        if slack[p] >= -SLACK_TOL:
            lambdas[:] = 0.0
            lambdas[np.array(active, dtype=int)] = u
            x, lambdas = _polish(h, f, wm, wv, x, lambdas, active)
            return QpSolution(x, lambdas, True, iters)

        n_p = -wm[p]
        u_p = 0.0
        s_p = slack[p]  # >=-form slack n_p.x - b_p, negative while violated

        while True:
            if active:
                nmat = -wm[active].T  # (n, k)
                hn = h_inv @ nmat
                kmat = nmat.T @ hn
                try:
                    r = np.linalg.solve(kmat, nmat.T @ (h_inv @ n_p))
                except np.linalg.LinAlgError:
                    return QpSolution(x, lambdas, False, iters)
                z = h_inv @ n_p - hn @ r
            else:
                r = np.zeros(0)
                z = h_inv @ n_p

            denom = float(n_p @ z)
            t1 = -s_p / denom if denom > STEP_TOL else np.inf

            t2 = np.inf
            blocker = -1
            for k, rk in enumerate(r):
                if rk > STEP_TOL:
                    tk = u[k] / rk
                    if tk < t2:
                        t2 = tk
                        blocker = k

            t = min(t1, t2)
            if not np.isfinite(t):
                # no primal progress possible and no blocking constraint to
                # drop: the constraint set is inconsistent
                return QpSolution(x, lambdas, False, iters)

            if denom > STEP_TOL:
                x = x + t * z
                s_p += t * denom
            for k in range(len(u)):
                u[k] -= t * r[k]
            u_p += t

            if t2 < t1:
                del active[blocker]
                del u[blocker]
                continue
            active.append(p)
            u.append(u_p)
            break

    return QpSolution(x, lambdas, False, iters)


def _polish(h, f, wm, wv, x, lambdas, active):
    """Re-solve the KKT system on the final active set to remove the drift
    accumulated over partial steps.  Falls back to the iterated point if the
    polished one is not optimal (degenerate active set)."""
    if not active:
        return x, lambdas
    idx = np.array(active, dtype=int)
    wa = wm[idx]
    k = len(active)
    kkt = np.block([[h, wa.T], [wa, np.zeros((k, k))]])
    rhs = np.concatenate([-f, wv[idx]])
    try:
        sol = np.linalg.solve(kkt, rhs)
    except np.linalg.LinAlgError:
        return x, lambdas
    x_new = sol[:h.shape[0]]
    lam_active = sol[h.shape[0]:]
    if np.any(lam_active < -SLACK_TOL):
        return x, lambdas
    if wm.size and np.any(wm @ x_new - wv > SLACK_TOL):
        return x, lambdas
    lam_new = np.zeros_like(lambdas)
    lam_new[idx] = np.maximum(lam_active, 0.0)
    return x_new, lam_new


def kkt_residuals(problem: QpProblem, solution: QpSolution) -> dict[str, float]:
    """Stationarity, primal feasibility and complementarity residuals."""
    x = solution.x
    lam = solution.multipliers
    grad = problem.hessian @ x + problem.linear + problem.w_matrix.T @ lam
    viol = problem.w_matrix @ x - problem.w_vector
    return {
        "stationarity": float(np.max(np.abs(grad))) if grad.size else 0.0,
        "feasibility": float(max(0.0, np.max(viol))) if viol.size else 0.0,
        "complementarity": float(np.max(np.abs(lam * viol))) if viol.size else 0.0,
        "dual_feasibility": float(max(0.0, -np.min(lam))) if lam.size else 0.0,
    }
