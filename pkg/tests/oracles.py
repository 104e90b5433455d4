"""Independent reference computations used by the tests.

None of these go through the package's quantile machinery.
"""
import numpy as np


def _atoms_of_cells(edges, masses):
    """Cumulative mass breakpoints of a piecewise-constant density."""
    c = np.concatenate(([0.0], np.cumsum(masses)))
    return c / c[-1]


def _quantile_on(edges, cum, s):
    """Generalized inverse inf{x : cdf(x) > s} of a piecewise-linear cdf."""
    j = np.searchsorted(cum, s, side="right") - 1
    j = np.clip(j, 0, len(edges) - 2)
    m = cum[j + 1] - cum[j]
    frac = np.where(m > 0, (s - cum[j]) / np.where(m > 0, m, 1.0), 0.0)
    return edges[j] + frac * (edges[j + 1] - edges[j])


def w2_monotone_coupling(edges, mass_a, mass_b):
    """Exact W2 between two piecewise-constant densities on the same cells.

    North-west-corner construction: the monotone coupling of cumulative
    masses.  Both cumulative mass sequences are merged; on every resulting
    mass interval the two transport maps are affine in the mass variable, so
    the squared displacement is integrated in closed form (Simpson's rule is
    exact for quadratics).
    """
    edges = np.asarray(edges, float)
    ca = _atoms_of_cells(edges, mass_a)
    cb = _atoms_of_cells(edges, mass_b)
    knots = np.unique(np.concatenate((ca, cb)))
    total = 0.0
    for s0, s1 in zip(knots[:-1], knots[1:]):
        if s1 - s0 <= 0:
            continue
        sm = 0.5 * (s0 + s1)
        # evaluate strictly inside the interval so jumps of the inverse are avoided
        eps = 1e-15 * max(1.0, s1)
        pts = np.array([s0 + eps, sm, s1 - eps])
        d = _quantile_on(edges, ca, pts) - _quantile_on(edges, cb, pts)
        total += (s1 - s0) / 6.0 * (d[0] ** 2 + 4 * d[1] ** 2 + d[2] ** 2)
    return float(np.sqrt(total))


def simplex_grid_search(A, b, step=1e-3):
    """Best residual of ``b - lam @ A`` over a grid of 2-element weights."""
    lam = np.arange(0.0, 1.0 + step / 2, step)
    R = b[None, :] - lam[:, None] * A[0][None, :] - (1 - lam)[:, None] * A[1][None, :]
    res = np.sqrt(np.mean(R * R, axis=1))
    k = int(np.argmin(res))
    return lam[k], res[k]


def simplex_grid_search_3(A, b, step=1e-2):
    """Same over the 2-simplex (three dictionary elements)."""
    best = (None, np.inf)
    g = np.arange(0.0, 1.0 + step / 2, step)
    for l0 in g:
        l1 = g[g <= 1 - l0 + 1e-12]
        l2 = 1 - l0 - l1
        R = b[None, :] - l0 * A[0] - l1[:, None] * A[1] - l2[:, None] * A[2]
        res = np.sqrt(np.mean(R * R, axis=1))
        k = int(np.argmin(res))
        if res[k] < best[1]:
            best = (np.array([l0, l1[k], l2[k]]), res[k])
    return best


def hminus1_sine_series(f, n_terms=2000, n_pts=200001):
    """``||f||_{H^-1}`` on [0, 1] from the sine expansion of ``f``."""
    x = np.linspace(0.0, 1.0, n_pts)
    fx = f(x)
    k = np.arange(1, n_terms + 1)
    total = 0.0
    for kk in k:
        coef = 2.0 * np.trapezoid(fx * np.sin(kk * np.pi * x), x)
        total += 0.5 * coef ** 2 / (kk * np.pi) ** 2
    return float(np.sqrt(total))


def sech2_soliton(x, t, k, c):
    """One KdV soliton reduced by hand from the log-det formula with one mode:
    det = 1 + c^2/(2k) exp(2kx - 2k^3 t), density 2 d2/dx2 log det."""
    phase = k * x - k ** 3 * t + 0.5 * np.log(c * c / (2 * k))
    return 2 * k * k / np.cosh(phase) ** 2
