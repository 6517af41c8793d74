# -*- coding: utf-8 -*-

"""
Uniform Hypercubes
==================
Grand bundling for ``n`` i.i.d. uniform items on ``[c, c+1]``. Everything
here works in shifted coordinates ``x - c``, where the transformed measure
lives on ``[0, 1]^n``: a unit atom at the origin, interior density
``-(n+1)``, facet density ``-c`` on ``{x_i = 0}`` and ``c+1`` on
``{x_i = 1}``.

The matching map sends the facet piece ``{x_1 = 1 >= x_2 >= ... >= x_n}``
onto the face ``{y_n = 0}`` with componentwise smaller points and
stretches surface measure by the constant factor ``rho = (c+1)/c``.
"""

__author__ = "mdopt developers"
__all__ = ["HypercubeInstance", "hypercube_negative_mass",
           "notbundling_bound", "hypercube_phi", "hypercube_phi_inverse",
           "phi_jacobian", "phi_jacobian_determinant",
           "matching_epsilon_bound", "sample_set_a", "phi_volume_ratio",
           "empirical_bundling_threshold", ]

from math import factorial

import numpy as np
from scipy.optimize import brentq

from ..distributions import Box, ProductDensity, UniformMarginal
from ..lattice import GridSpec
from ..measure import Facet, SeparableTerm, TransformedMeasure
from ..utils import DomainError, RootNotBracketedError, get_logger, timed
from .menus import check_grand_bundling

logger = get_logger(__name__)


class HypercubeInstance(object):
    """
    ``n`` uniform items on ``[c, c+1]``

    Parameters
    ----------

    n: integer, required
        Number of items, at least 1

    c: float, required
        Lowest valuation, at least 0

    """

    def __init__(self, n, c):
        if int(n) != n or n < 1:
            msg = f"Error: The number of items must be a positive integer. "\
                  f"Got {n}"
            raise DomainError(msg)
        if c < 0:
            msg = f"Error: The lowest valuation must be non-negative. Got {c}"
            raise DomainError(msg)
        self.n = int(n)
        self.c = float(c)

    @property
    def rho(self):
        """Surface stretch of the matching map, ``(c+1)/c``"""
        return np.inf if self.c == 0 else (self.c + 1.0) / self.c

    @property
    def box(self):
        return Box(np.zeros(self.n), np.ones(self.n))

    def density(self):
        """The unshifted uniform density on ``[c, c+1]^n``"""
        return ProductDensity([UniformMarginal(self.c, self.c + 1.0)
                               for _ in range(self.n)])

    def measure(self):
        """Transformed measure in shifted coordinates"""
        n, c = self.n, self.c
        none = (None, ) * n
        facets = []
        for i in range(n):
            if c > 0:
                facets.append(Facet(i, 0.0, -c, none))
            facets.append(Facet(i, 1.0, c + 1.0, none))
        return TransformedMeasure(self.box, [(np.zeros(n), 1.0)],
                                  [SeparableTerm(-(n + 1.0), none)], facets)

    def mu_z(self, h):
        """``mu({sum x <= h})`` in closed form, ``0 <= h <= 1``"""
        n, c = self.n, self.c
        if not 0.0 <= h <= 1.0:
            msg = f"Error: The closed form needs 0 <= h <= 1. Got {h}"
            raise DomainError(msg)
        return 1.0 - (n + 1) * h**n / factorial(n) - \
            n * c * h**(n - 1) / factorial(n - 1)

    def critical_price(self):
        """
        Shifted price ``h`` in ``(0, 1]`` with ``mu({sum x <= h}) = 0``

        Raises
        ------

        RootNotBracketedError
            ``mu`` stays positive up to ``h = 1``; grand bundling is then
            not optimal at any price

        """
        if self.mu_z(1.0) > 0:
            msg = f"Error: mu(Z_h) > 0 for every h <= 1 when n = {self.n}, "\
                  f"c = {self.c:g}"
            raise RootNotBracketedError(msg)
        return float(brentq(self.mu_z, 0.0, 1.0, xtol=1e-14))

    def bundle_price(self):
        """Candidate grand-bundle price in the original coordinates"""
        return self.n * self.c + self.critical_price()

    def __repr__(self):
        return f"HypercubeInstance(n={self.n}, c={self.c:g})"


def hypercube_negative_mass(n, c):
    """``mu_-({sum x <= 1})`` in shifted coordinates"""
    return (n + 1) / factorial(n) + n * c / factorial(n - 1)


def notbundling_bound(n, c):
    """
    True when the negative mass below the unit simplex cannot cancel the
    atom, which rules grand bundling out
    """
    if n < 1 or c < 0:
        msg = f"Error: Needs n >= 1 and c >= 0. Got n = {n}, c = {c}"
        raise DomainError(msg)
    return bool(hypercube_negative_mass(n, c) < 1.0)


def _set_a_limit(n, rho):
    return 1.0 - ((rho - 1.0) / rho)**(1.0 / (n - 1))


def _check_rho(rho, n):
    if not rho > 1:
        msg = f"Error: The stretch factor must exceed 1. Got {rho}"
        raise DomainError(msg)
    if n < 2:
        msg = f"Error: The matching map needs at least two items. Got {n}"
        raise DomainError(msg)


def hypercube_phi(x, rho, tol=1e-12):
    """
    Matching map from ``A = {1 = x_1 >= ... >= x_n, x_n <= delta}`` to
    ``{y_n = 0}``, with ``delta = 1 - ((rho-1)/rho)^(1/(n-1))``

    Parameters
    ----------

    x: array-like, shape (n,) or (npoints, n)

    rho: float, required
        Greater than 1

    Returns
    -------

    y: array of the same shape as ``x``

    Raises
    ------

    DomainError
        A point outside ``A``

    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    n = pts.shape[1]
    _check_rho(rho, n)
    k = n - 1
    delta = _set_a_limit(n, rho)
    xn = pts[:, -1]
    ok = (np.abs(pts[:, 0] - 1.0) <= tol) & \
        np.all(np.diff(pts, axis=1) <= tol, axis=1) & \
        (xn >= -tol) & (xn <= delta + tol)
    if not np.all(ok):
        msg = f"Error: {int(np.sum(~ok))} point(s) outside the matching "\
              f"domain (x_1 = 1 >= ... >= x_n, x_n <= {delta:.6g})"
        raise DomainError(msg)
    s = 1.0 - xn
    y1 = np.maximum(1.0 - rho * (1.0 - s**k), 0.0)**(1.0 / k)
    y = np.zeros_like(pts)
    y[:, 0] = y1
    if n > 2:
        y[:, 1:-1] = (pts[:, 1:-1] - xn[:, None]) / s[:, None] * \
            y1[:, None]
    return y[0] if single else y


def hypercube_phi_inverse(y, rho):
    """Inverse of :func:`hypercube_phi` on ``{1 >= y_1 > 0, y_n = 0}``"""
    y = np.asarray(y, dtype=np.float64)
    single = y.ndim == 1
    pts = np.atleast_2d(y)
    n = pts.shape[1]
    _check_rho(rho, n)
    k = n - 1
    y1 = pts[:, 0]
    if np.any(y1 <= 0) or np.any(y1 > 1):
        msg = "Error: The inverse needs 0 < y_1 <= 1"
        raise DomainError(msg)
    xn = 1.0 - (1.0 - (1.0 - y1**k) / rho)**(1.0 / k)
    x = np.empty_like(pts)
    x[:, 0] = 1.0
    x[:, -1] = xn
    if n > 2:
        x[:, 1:-1] = xn[:, None] + (1.0 - xn[:, None]) * \
            pts[:, 1:-1] / y1[:, None]
    return x[0] if single else x


def phi_jacobian(x, rho, method='analytic', step=1e-7):
    """
    Jacobian of ``(x_2, ..., x_n) -> (y_1, ..., y_{n-1})`` at a single
    point of ``A``

    method: string, optional, default: 'analytic'
        ``'analytic'`` or ``'finite-difference'`` (central differences)
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if method == 'finite-difference':
        J = np.empty((n - 1, n - 1))
        for j in range(1, n):
            hi, lo = x.copy(), x.copy()
            hi[j] += step
            lo[j] -= step
            J[:, j - 1] = (hypercube_phi(hi, rho)[:-1] -
                           hypercube_phi(lo, rho)[:-1]) / (2 * step)
        return J
    if method != 'analytic':
        msg = f"Error: method must be 'analytic' or 'finite-difference'. "\
              f"Got '{method}'"
        raise ValueError(msg)
    k = n - 1
    y = hypercube_phi(x, rho)
    y1, xn = y[0], x[-1]
    s = 1.0 - xn
    dy1 = -rho * s**(k - 1) * y1**(1 - k)
    J = np.zeros((k, k))
    J[0, -1] = dy1
    for i in range(1, n - 1):
        J[i, i - 1] = y1 / s
        J[i, -1] = (x[i] - 1.0) / s**2 * y1 + (x[i] - xn) / s * dy1
    return J


def phi_jacobian_determinant(x, rho, method='analytic'):
    """Equals ``(-1)^(n+1) rho`` throughout the interior of ``A``"""
    return float(np.linalg.det(phi_jacobian(x, rho, method=method)))


def matching_epsilon_bound(eps, rho, n):
    """
    Lower bound on ``x_n`` for points whose image has ``y_1 <= eps``:
    ``1 - ((eps^(n-1) + rho - 1)/rho)^(1/(n-1))``
    """
    _check_rho(rho, n)
    k = n - 1
    return 1.0 - ((eps**k + rho - 1.0) / rho)**(1.0 / k)


def sample_set_a(n, rho, size, rng=None, xn_max=None):
    """
    Random points of ``A``: ``x_n`` uniform on ``[0, xn_max]`` and the
    middle coordinates sorted uniforms on ``[x_n, 1]``
    """
    _check_rho(rho, n)
    rng = np.random.default_rng(rng)
    delta = _set_a_limit(n, rho)
    xn_max = delta if xn_max is None else min(xn_max, delta)
    x = np.empty((size, n))
    x[:, 0] = 1.0
    x[:, -1] = rng.random(size) * xn_max
    if n > 2:
        mid = x[:, -1:] + rng.random((size, n - 2)) * (1.0 - x[:, -1:])
        x[:, 1:-1] = -np.sort(-mid, axis=1)
    return x


def phi_volume_ratio(rho, n, samples=400000, seed=0, q=0.5):
    """
    Monte Carlo ratio ``vol(phi(S)) / vol(S)`` for
    ``S = {x in A : x_n <= q delta}``; close to ``rho``

    ``vol(S)`` is exact; the image volume is the hit fraction of uniform
    points of ``[0, 1]^(n-1)`` whose preimage lies in ``S``.
    """
    _check_rho(rho, n)
    k = n - 1
    cut = q * _set_a_limit(n, rho)
    vol_s = (1.0 - (1.0 - cut)**k) / factorial(k)
    rng = np.random.default_rng(seed)
    y = rng.random((samples, k))
    ordered = np.all(np.diff(y, axis=1) <= 0, axis=1) & (y[:, 0] > 0)
    y = y[ordered]
    xn = 1.0 - (1.0 - (1.0 - y[:, 0]**k) / rho)**(1.0 / k)
    hits = np.count_nonzero(xn <= cut)
    vol_image = hits / samples
    logger.debug(f"Image volume {vol_image:.6g} from {hits} hits, "
                 f"vol(S) = {vol_s:.6g}")
    return vol_image / vol_s


def empirical_bundling_threshold(n, nodes=21, lo=0.0, hi=1.0, iters=8,
                                 config=None):
    """
    Bisection on ``c`` for the smallest lowest-valuation at which
    :func:`check_grand_bundling` passes at the critical price

    Assumes the verdict is monotone in ``c``. The result is a grid-level
    estimate: it is resolved to ``(hi - lo) / 2**iters`` in ``c`` on top
    of the discretisation error of the ``nodes``-per-axis grid.

    Parameters
    ----------

    n: integer, required
        Number of items

    nodes: integer, optional, default: 21
        Grid points per axis of the dominance checks

    lo, hi: float, optional, default: 0.0, 1.0
        Initial bracket; grand bundling must pass at ``hi``

    iters: integer, optional, default: 8
        Bisection steps

    Raises
    ------

    RootNotBracketedError
        Grand bundling fails at ``hi``

    """
    def passes(c):
        inst = HypercubeInstance(n, c)
        try:
            h = inst.critical_price()
        except RootNotBracketedError:
            return False
        mu = inst.measure()
        report = check_grand_bundling(h, mu, GridSpec(mu.box, nodes),
                                      config=config)
        return report.passed

    with timed(logger, f"Bisecting the bundling threshold for n = {n}"):
        if not passes(hi):
            msg = f"Error: Grand bundling fails at c = {hi:g}; no threshold "\
                  f"below it"
            raise RootNotBracketedError(msg)
        if passes(lo):
            return float(lo)
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            if passes(mid):
                hi = mid
            else:
                lo = mid
    return float(hi)
