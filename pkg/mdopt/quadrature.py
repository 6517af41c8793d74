# -*- coding: utf-8 -*-

"""
Quadrature
==========
Gauss-Legendre rules: fixed rules over a list of pieces, a globally
adaptive 1-d rule, and iterated integration over any
:class:`~mdopt.regions.Region`. Integrands are vectorised; they receive an
array of points and may return one value or a vector of values per point.
"""

__author__ = "mdopt developers"
__all__ = ["QuadratureConfig", "gauss_legendre", "fixed_gauss_legendre",
           "adaptive_gauss_legendre", "integrate_interval",
           "integrate_region", ]

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .regions import EmptyRegion
from .utils import AccuracyError, get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class QuadratureConfig:
    """
    Knobs of the adaptive rule

    Parameters
    ----------

    order: integer, optional, default: 4
        Gauss-Legendre points per sub-interval

    tol: float, optional, default: 1e-10
        Absolute error target over the full interval. Every sub-interval
        gets the share proportional to its width

    max_depth: integer, optional, default: 48
        Maximum number of bisections of a sub-interval

    abort_tol: float, optional, default: 1e-6
        An ``AccuracyError`` is raised when the summed error estimate of
        sub-intervals that hit ``max_depth`` exceeds this value

    """
    order: int = 4
    tol: float = 1e-10
    max_depth: int = 48
    abort_tol: float = 1e-6


DEFAULT_QUADRATURE = QuadratureConfig()


@lru_cache(maxsize=None)
def gauss_legendre(order):
    """Nodes and weights of the ``order``-point rule on [-1, 1]"""
    nodes, weights = np.polynomial.legendre.leggauss(int(order))
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _mapped(a, b, order):
    nodes, weights = gauss_legendre(order)
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * nodes, half * weights


def fixed_gauss_legendre(func, edges, order=12):
    """
    Integrates ``func`` with an ``order``-point rule on every piece
    ``[edges[k], edges[k+1]]`` and returns the sum
    """
    edges = np.asarray(edges, dtype=np.float64)
    if edges.size < 2:
        return 0.0
    nodes, weights = gauss_legendre(order)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    pts = (0.5 * (hi + lo))[:, None] + half[:, None] * nodes[None, :]
    wts = half[:, None] * weights[None, :]
    vals = np.asarray(func(pts.ravel()), dtype=np.float64)
    wts = wts.ravel()
    if vals.ndim == 1:
        return float(np.dot(wts, vals))
    return wts @ vals


def adaptive_gauss_legendre(func, a, b, config=None):
    """
    Globally adaptive Gauss-Legendre integral of ``func`` over ``[a, b]``

    Parameters
    ----------

    func: callable, required
        Maps a 1-d array of abscissae to values of shape (k,) or (k, m)

    a, b: float, required
        Integration limits; ``b <= a`` integrates to zero

    config: QuadratureConfig, optional, default: None
        Uses ``QuadratureConfig()`` when ``None``

    Returns
    -------

    value: float or array of shape (m,)

    """
    config = DEFAULT_QUADRATURE if config is None else config
    if not b > a:
        sample = np.asarray(func(np.array([a])), dtype=np.float64)
        return 0.0 if sample.ndim == 1 else np.zeros(sample.shape[1])

    order = config.order
    width = b - a
    total = None
    unresolved = 0.0
    stack = [(a, b, 0)]
    while stack:
        lo, hi, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        x0, w0 = _mapped(lo, hi, order)
        x1, w1 = _mapped(lo, mid, order)
        x2, w2 = _mapped(mid, hi, order)
        vals = np.asarray(func(np.concatenate([x0, x1, x2])),
                          dtype=np.float64)
        coarse = np.tensordot(w0, vals[:order], axes=(0, 0))
        fine = np.tensordot(w1, vals[order:2*order], axes=(0, 0)) + \
            np.tensordot(w2, vals[2*order:], axes=(0, 0))
        err = float(np.max(np.abs(fine - coarse)))
        if err <= config.tol * (hi - lo) / width:
            total = fine if total is None else total + fine
        elif depth >= config.max_depth:
            unresolved += err
            total = fine if total is None else total + fine
        else:
            stack.append((mid, hi, depth + 1))
            stack.append((lo, mid, depth + 1))

    if unresolved > config.abort_tol:
        msg = f"Error: Adaptive quadrature on [{a}, {b}] left an estimated "\
              f"error of {unresolved:.3e} (allowed {config.abort_tol:.1e})"
        raise AccuracyError(msg)
    if np.ndim(total) == 0:
        return float(total)
    return total


def integrate_interval(func, lo, hi, config=None, breakpoints=()):
    """
    Adaptive integral over ``[lo, hi]`` split at the interior
    ``breakpoints``
    """
    cuts = sorted(float(t) for t in breakpoints if lo < t < hi)
    edges = [lo] + cuts + [hi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total = total + adaptive_gauss_legendre(func, a, b, config=config)
    return total


def _zeros(size):
    return 0.0 if size is None else np.zeros(size)


def integrate_region(func, region, lows, highs, config=None, size=None):
    """
    Iterated adaptive integral of ``func`` over ``region`` intersected
    with the box ``[lows, highs]``

    Parameters
    ----------

    func: callable, required
        Maps points of shape (k, n) to values of shape (k,) or, for vector
        integrands, (k, size)

    region: Region, required
        Integration domain. Its ``section``/``intervals``/``breakpoints``
        drive the iteration over axis 0 first

    lows, highs: array-like, required
        Bounding box of the integration

    config: QuadratureConfig, optional, default: None

    size: integer, optional, default: None
        Length of vector-valued integrands; ``None`` for scalars

    Returns
    -------

    value: float, or array of shape (size,)

    """
    lows = np.asarray(lows, dtype=np.float64)
    highs = np.asarray(highs, dtype=np.float64)
    ndim = lows.size
    if isinstance(region, EmptyRegion) or np.any(highs <= lows):
        return _zeros(size)

    if ndim == 1:
        total = _zeros(size)
        kinks = region.breakpoints(0, lows, highs)
        for a, b in region.intervals(lows[0], highs[0]):
            part = integrate_interval(lambda t: func(t[:, None]), a, b,
                                      config=config, breakpoints=kinks)
            total = total + part
        return total

    def outer(ts):
        out = []
        for t in ts:
            sub = region.section(0, t)

            def inner(y, t=t):
                return func(np.insert(y, 0, t, axis=1))

            out.append(integrate_region(inner, sub, lows[1:], highs[1:],
                                        config=config, size=size))
        return np.asarray(out, dtype=np.float64)

    kinks = region.breakpoints(0, lows, highs)
    return integrate_interval(outer, lows[0], highs[0], config=config,
                              breakpoints=kinks)
