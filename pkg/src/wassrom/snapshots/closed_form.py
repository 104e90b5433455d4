"""Exact solutions with explicit cdf/icdf: pure transport and inviscid Burgers."""
import numpy as np


def transport_cdf(y, x):
    """cdf of the indicator of ``[y - 1, y]``."""
    return np.clip(np.asarray(x, dtype=float) - (y - 1.0), 0.0, 1.0)


def transport_icdf(y, s):
    return y - 1.0 + np.asarray(s, dtype=float)


def burgers_icdf(y, t, s):
    """icdf of the entropy solution started from ``y * 1_[0, 1/y)``.

    A rarefaction fan ``x/t`` on ``[0, yt)`` followed by the plateau ``y`` up
    to the shock; once the fan reaches the shock (``t >= 2/y^2``) only the fan
    ``x/t`` on ``[0, sqrt(2t)]`` remains.
    """
    s = np.asarray(s, dtype=float)
    s_c = 0.5 * y * y * t
    fan = np.sqrt(2.0 * t * s)
    if s_c >= 1.0:
        return fan
    return np.where(s < s_c, fan, (s + s_c) / y)


def burgers_cdf(y, t, x):
    x = np.asarray(x, dtype=float)
    if t <= 0:
        return np.clip(y * x, 0.0, 1.0)
    s_c = min(0.5 * y * y * t, 1.0)
    x_c = np.sqrt(2.0 * t * s_c)
    xp = np.maximum(x, 0.0)
    fan = xp * xp / (2.0 * t)
    if s_c >= 1.0:
        out = np.where(xp < x_c, fan, 1.0)
    else:
        out = np.where(xp < x_c, fan, np.minimum(y * xp - 0.5 * y * y * t, 1.0))
    return np.clip(out, 0.0, 1.0)


def burgers_density(y, t, x):
    """Pointwise entropy solution on the unbounded line."""
    x = np.asarray(x, dtype=float)
    if t <= 0:
        return np.where((x >= 0) & (x < 1.0 / y), y, 0.0)
    if t < 2.0 / (y * y):
        shock = 1.0 / y + 0.5 * y * t
        return np.where((x >= 0) & (x < y * t), x / t,
                        np.where((x >= y * t) & (x <= shock), y, 0.0))
    return np.where((x >= 0) & (x <= np.sqrt(2 * t)), x / t, 0.0)


def cell_averages_from_cdf(cdf, edges):
    """Exact cell-averaged density from a cdf evaluated at the cell edges."""
    c = cdf(edges)
    return np.diff(c) / np.diff(edges)
