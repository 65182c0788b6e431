"""Shared quadrature rules and the thread pool used for data-parallel work."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache

import numpy as np

THREADS_ENV = "ABDIFFRACT_THREADS"


def thread_count() -> int:
    """Worker count from ``ABDIFFRACT_THREADS``, defaulting to the CPU count."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            n = 0
        if n >= 1:
            return n
    return max(1, os.cpu_count() or 1)


def parallel_map(fn, items) -> list:
    """Order-preserving map over a thread pool (numpy releases the GIL)."""
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


@lru_cache(maxsize=64)
def _leggauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_nodes(breaks, order: int = 20):
    """Composite Gauss-Legendre nodes and weights over consecutive breakpoints."""
    breaks = np.asarray(breaks, dtype=float)
    x, w = _leggauss(order)
    a = breaks[:-1, None]
    b = breaks[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + b) * 0.5 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def uniform_breaks(a: float, b: float, max_width: float) -> np.ndarray:
    """Equal panels on [a, b] no wider than ``max_width``."""
    n = max(1, int(np.ceil((b - a) / max_width)))
    return np.linspace(a, b, n + 1)


def refined_breaks(a: float, b: float, max_width: float, focus: float, focus_halfwidth: float,
                   focus_width: float) -> np.ndarray:
    """Panels on [a, b], finer (``focus_width``) within ``focus +- focus_halfwidth``."""
    lo = min(max(focus - focus_halfwidth, a), b)
    hi = max(min(focus + focus_halfwidth, b), a)
    parts = []
    if lo > a:
        parts.append(uniform_breaks(a, lo, max_width)[:-1])
    if hi > lo:
        parts.append(uniform_breaks(lo, hi, focus_width)[:-1])
    if b > hi:
        parts.append(uniform_breaks(hi, b, max_width)[:-1])
    parts.append(np.array([b]))
    return np.concatenate(parts)
