"""Least squares on the probability simplex.

``min_x 1/2 x'Gx - c'x  s.t.  x >= 0, sum(x) = 1`` by a primal active-set
method.  ``G`` is a Gram matrix of icdfs, so it is symmetric positive
semi-definite and frequently singular (affinely dependent dictionaries);
the equality-constrained subproblems are solved with a tiny diagonal shift
so that each one has a unique minimizer.
"""
import numpy as np

from .errors import SolverFailureError

FEAS_TOL = 1e-12


def project_to_simplex(v):
    """Euclidean projection of ``v`` onto the probability simplex (sort-based)."""
    v = np.asarray(v, dtype=float)
    n = len(v)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, n + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def kkt_residual(G, c, x):
    """Largest KKT violation of ``x``, relative to ``||G||``.

    On the support the gradient must equal a common multiplier; off the
    support it must be no smaller.  Returns ``(stationarity, complementarity)``.
    """
    G = np.asarray(G, dtype=float)
    g = G @ x - c
    support = x > FEAS_TOL
    nu = g[support].mean()
    scale = max(np.linalg.norm(G, 2), 1e-300)
    stat = np.abs(g[support] - nu).max() / scale
    off = g[~support] - nu
    comp = max(0.0, -off.min()) / scale if off.size else 0.0
    return float(stat), float(comp)


def _solve_eqp(G, c, idx, shift):
    k = len(idx)
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = G[np.ix_(idx, idx)]
    K[:k, :k][np.diag_indices(k)] += shift
    K[:k, k] = 1.0
    K[k, :k] = 1.0
    rhs = np.concatenate((c[idx], [1.0]))

    def solve(r):
        try:
            return np.linalg.solve(K, r)
        except np.linalg.LinAlgError:
            return np.linalg.lstsq(K, r, rcond=None)[0]

    sol = solve(rhs)
    # refine against the unshifted system to remove the O(shift / lambda_min)
    # bias; steps that do not reduce the true residual (singular G) are dropped
    K0 = K.copy()
    K0[:k, :k][np.diag_indices(k)] -= shift
    r = rhs - K0 @ sol
    for _ in range(3):
        cand = sol + solve(r)
        r_new = rhs - K0 @ cand
        if not np.linalg.norm(r_new) < np.linalg.norm(r):
            break
        sol, r = cand, r_new
    return sol[:k], -sol[k]


def solve_simplex_qp(G, c, x0=None, max_iter=None, tol=1e-12):
    """Active-set solve of the simplex-constrained quadratic program.

    ``x0`` warm-starts from a feasible point (it is clipped and renormalized).
    Without it the best simplex vertex is used.  Returns ``(x, n_iter)``.
    """
    G = np.asarray(G, dtype=float)
    c = np.asarray(c, dtype=float)
    n = len(c)
    if max_iter is None:
        max_iter = max(10 * n * n, 10)
    diag = np.diag(G)
    scale = max(float(np.abs(diag).max()), 1e-300)
    shift = 1e-12 * scale
    kkt_tol = tol * scale

    if x0 is None:
        x = np.zeros(n)
        x[int(np.argmin(0.5 * diag - c))] = 1.0
    else:
        x = np.maximum(np.asarray(x0, dtype=float), 0.0)
        if len(x) < n:
            x = np.concatenate((x, np.zeros(n - len(x))))
        s = x.sum()
        if s <= 0:
            x = np.zeros(n)
            x[int(np.argmin(0.5 * diag - c))] = 1.0
        else:
            x /= s
    active = x > 0
    history = []

    for it in range(1, max_iter + 1):
        idx = np.flatnonzero(active)
        y, nu = _solve_eqp(G, c, idx, shift)
        history.append(float(0.5 * x @ G @ x - c @ x))
        if np.all(y >= 0):
            x = np.zeros(n)
            x[idx] = y
            x /= x.sum()
            g = G @ x - c
            nu = g[idx].mean()
            free = np.flatnonzero(~active)
            if free.size == 0:
                return x, it
            d = g[free] - nu
            j = int(np.argmin(d))
            if d[j] >= -kkt_tol:
                return x, it
            active[free[j]] = True
        else:
            xi = x[idx]
            neg = y < 0
            alphas = xi[neg] / (xi[neg] - y[neg])
            alpha = float(alphas.min())
            x_new = np.zeros(n)
            x_new[idx] = xi + alpha * (y - xi)
            blocking = idx[neg][alphas <= alpha * (1 + 1e-12)]
            x_new[blocking] = 0.0
            x_new[x_new < 0] = 0.0
            x = x_new / x_new.sum()
            active = x > 0
    raise SolverFailureError(
        f"simplex QP did not converge in {max_iter} iterations", history)


def simplex_least_squares(A, b, weight=1.0, x0=None):
    """Minimize ``weight * ||b - x'A||^2`` over the simplex.

    ``A`` holds one dictionary element per row.  Returns the weights and the
    residual norm ``sqrt(weight) * ||b - x'A||`` computed from the vectors
    themselves (not from the Gram expansion, which loses accuracy when the
    residual is small).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    G = weight * (A @ A.T)
    c = weight * (A @ b)
    x, _ = solve_simplex_qp(G, c, x0=x0)
    r = b - x @ A
    return x, float(np.sqrt(weight * (r @ r)))
