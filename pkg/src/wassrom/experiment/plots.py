"""SVG figures.  Any plotting failure is logged and swallowed."""
from __future__ import annotations

import functools
import logging

import numpy as np

log = logging.getLogger(__name__)


def _safe(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except Exception as exc:  # plotting must never break the numerics
            log.warning("plot %s failed: %s", fn.__name__, exc)
            return None
    return wrapper


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    # stable element ids and no timestamp, so reruns produce identical files
    matplotlib.rcParams["svg.hashsalt"] = "wassrom"
    return plt


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    import matplotlib.pyplot as plt
    plt.close(fig)
    return path


@_safe
def decay_plot(path, curves: dict, title=""):
    """Log-log curves; ``curves`` maps label -> (n, values)."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    for label, (n, v) in curves.items():
        v = np.asarray(v, dtype=float)
        ok = v > 0
        ax.loglog(np.asarray(n)[ok], v[ok], marker="o", ms=3, label=label)
    ax.set_xlabel("n")
    ax.set_ylabel("error")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    return _save(fig, path)


@_safe
def reconstruction_plot(path, x, truth, recs: dict, title=""):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(x, truth, "k-", lw=2, label="exact")
    for label, y in recs.items():
        ax.plot(x, y, lw=1, label=label)
    ax.set_xlabel("x")
    ax.set_title(title)
    ax.legend()
    return _save(fig, path)


@_safe
def runtime_plot(path, t, hf, reduced: dict):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.semilogy(t, hf, "k.", label="high fidelity")
    for label, r in reduced.items():
        ax.semilogy(t, r, ".", label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("seconds")
    ax.legend()
    return _save(fig, path)
