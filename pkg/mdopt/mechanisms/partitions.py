# -*- coding: utf-8 -*-

"""
Exclusion Sets and Canonical Partitions
=======================================
Two-item mechanisms described by the set ``Z`` of types that buy nothing.
The buyer's utility is the l1 distance to ``Z``; the canonical partition
``Z, A, B, W`` tells which way (down, left or diagonally) that distance is
measured, and hence which lottery each type buys.

An exclusion set is stored as the part of the type box below a top curve
``y <= top(x)``, left of a right curve ``x <= right(y)`` and below the
diagonal cut ``x + y <= price``; any of the three may be absent.
"""

__author__ = "mdopt developers"
__all__ = ["ExclusionSet2D", "CanonicalPartition", "ExclusionMechanism",
           "canonical_partition", "exclusion_utility",
           "exclusion_utility_bruteforce", "mechanism_from_partition",
           "check_well_formed", "find_critical_price",
           "boundary_from_line_integrals", "beta_factorization",
           "monotone_curve", "PARTITION_LABELS", ]

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq, minimize_scalar

from ..dominance import check_regionthm, first_order_dominates
from ..lattice import GridSpec, discretize_measure
from ..measure import region_mass
from ..quadrature import (QuadratureConfig, integrate_interval,
                          integrate_region)
from ..regions import (BoxRegion, ComplementRegion, EmptyRegion,
                       HalfspaceRegion, IntersectionRegion,
                       IntervalSetRegion, Region)
from ..utils import (DEFAULT_TOLERANCES, InvalidExclusionSetError,
                     PreconditionError, RootNotBracketedError,
                     UnsupportedDimensionError, as_points, get_logger,
                     timed)
from .menus import MechanismReport, MenuItem, region_dominance

logger = get_logger(__name__)

PARTITION_LABELS = ('Z', 'A', 'B', 'W')

_EDGE = 1e-12
_BISECT = 64


def _as_array(func, values):
    return np.broadcast_to(np.asarray(func(values), dtype=np.float64),
                           values.shape).copy()


def monotone_curve(t, values):
    """
    Monotone-cubic (PCHIP) interpolant through ``(t, values)`` and its
    derivative; the end pieces extend past the samples
    """
    t = np.asarray(t, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if t.size < 2 or t.size != values.size:
        msg = f"Error: A boundary curve needs at least two (t, value) "\
              f"pairs of equal length. Got {t.size} and {values.size}"
        raise PreconditionError(msg)
    order = np.argsort(t)
    interp = PchipInterpolator(t[order], values[order], extrapolate=True)
    return interp, interp.derivative()


class ExclusionSet2D(Region):
    """
    Convex, compact, decreasing subset of a two-item box

    Parameters
    ----------

    box: Box, required

    top: callable, optional, default: None
        Concave non-increasing ``x -> y`` bound

    right: callable, optional, default: None
        Concave non-increasing ``y -> x`` bound

    price: float, optional, default: None
        Diagonal cut ``x + y <= price``

    top_prime, right_prime: callable, optional, default: None
        Derivatives of the curves; finite differences otherwise

    """
    kind = 'exclusion-set'

    def __init__(self, box, top=None, right=None, price=None,
                 top_prime=None, right_prime=None):
        if box.ndim != 2:
            msg = f"Error: Exclusion sets are two-item objects. Got a "\
                  f"{box.ndim}-d box"
            raise UnsupportedDimensionError(msg)
        super().__init__(2)
        self.box = box
        self.top = top
        self.right = right
        self.price = None if price is None else float(price)
        self.top_prime = top_prime
        self.right_prime = right_prime
        self._critical = None

    def with_price(self, price):
        return ExclusionSet2D(self.box, top=self.top, right=self.right,
                              price=price, top_prime=self.top_prime,
                              right_prime=self.right_prime)

    def _reach(self, values, along):
        """
        Largest coordinate along axis ``along`` still in Z, given the other
        coordinate; NaN where the line misses Z
        """
        values = np.atleast_1d(np.asarray(values, dtype=np.float64))
        lows, highs = self.box.lows, self.box.highs
        fixed = 1 - along
        lo, hi = lows[along], highs[along]
        out = np.full(values.shape, hi)
        own, other = (self.top, self.right) if along == 1 else \
            (self.right, self.top)
        clipped = np.clip(values, lows[fixed], highs[fixed])
        if own is not None:
            out = np.minimum(out, _as_array(own, clipped))
        if self.price is not None:
            out = np.minimum(out, self.price - values)
        if other is not None:
            # other(t) >= value holds on an initial segment of [lo, hi]
            ok_hi = _as_array(other, np.full(values.shape, hi)) >= values
            a = np.full(values.shape, lo)
            b = np.full(values.shape, hi)
            for _ in range(_BISECT):
                mid = 0.5 * (a + b)
                good = _as_array(other, mid) >= values
                a = np.where(good, mid, a)
                b = np.where(good, b, mid)
            out = np.minimum(out, np.where(ok_hi, hi, a))
            start_ok = _as_array(other, np.full(values.shape, lo)) >= \
                values - _EDGE
            out = np.where(start_ok, out, np.nan)
        outside = (values < lows[fixed] - _EDGE) | \
            (values > highs[fixed] + _EDGE) | (out < lo - _EDGE)
        return np.where(outside, np.nan, np.maximum(out, lo))

    def upper(self, x):
        """``max{y : (x, y) in Z}`` (NaN where the column misses Z)"""
        return self._reach(x, along=1)

    def rightmost(self, y):
        """``max{x : (x, y) in Z}`` (NaN where the row misses Z)"""
        return self._reach(y, along=0)

    def contains(self, points):
        pts = as_points(points, 2)
        inside = self.box.contains(pts)
        ymax = self.upper(pts[:, 0])
        return inside & ~np.isnan(ymax) & \
            (pts[:, 1] <= np.nan_to_num(ymax, nan=-np.inf) + _EDGE)

    def section(self, axis, t):
        reach = self._reach(np.array([t]), along=1 - axis)[0]
        if np.isnan(reach):
            return EmptyRegion(1)
        lo = self.box.lows[1 - axis]
        return IntervalSetRegion([(lo, reach)])

    def breakpoints(self, axis, lows, highs):
        if np.isnan(self.x_max) or np.isnan(self.y_max):
            return []
        x_crit, y_crit = self.critical_point
        P = self.critical_price
        cands = [x_crit, P - y_crit, self.x_max] if axis == 0 else \
            [y_crit, P - x_crit, self.y_max]
        return sorted({float(c) for c in cands
                       if lows[axis] < c < highs[axis]})

    @property
    def x_max(self):
        return float(self.rightmost(self.box.lows[1])[0])

    @property
    def y_max(self):
        return float(self.upper(self.box.lows[0])[0])

    @property
    def is_degenerate(self):
        """True when Z has an empty interior"""
        lows = self.box.lows
        x_max, y_max = self.x_max, self.y_max
        if np.isnan(x_max) or np.isnan(y_max):
            return True
        return x_max <= lows[0] + _EDGE or y_max <= lows[1] + _EDGE

    def _leftmost_reaching(self, reach, lo, hi, target, eps):
        """Smallest ``s`` in [lo, hi] with ``s + reach(s) >= target - eps``"""
        def value(s):
            r = reach(np.array([s]))[0]
            return -np.inf if np.isnan(r) else s + r
        if value(lo) >= target - eps:
            return lo
        a, b = lo, hi
        for _ in range(_BISECT):
            mid = 0.5 * (a + b)
            if value(mid) >= target - eps:
                b = mid
            else:
                a = mid
        return b

    def _compute_critical(self):
        lows = self.box.lows
        x_max = self.x_max
        if np.isnan(x_max):
            msg = f"Error: {self} does not meet the box"
            raise PreconditionError(msg)
        xs = np.linspace(lows[0], x_max, 1025)
        vals = xs + self.upper(xs)
        k = int(np.nanargmax(vals))
        a, b = xs[max(k - 1, 0)], xs[min(k + 1, xs.size - 1)]
        best_x, best = xs[k], vals[k]
        if b > a:
            res = minimize_scalar(lambda s: -(s + self.upper(s)[0]),
                                  bounds=(a, b), method='bounded',
                                  options={'xatol': 1e-13})
            if res.success and -res.fun > best:
                best_x, best = float(res.x), float(-res.fun)
        eps = 1e-12 * max(1.0, abs(best))
        x_crit = self._leftmost_reaching(self.upper, lows[0], best_x, best,
                                         eps)
        y_hi = self.upper(np.array([best_x]))[0]
        y_crit = self._leftmost_reaching(self.rightmost, lows[1],
                                         max(y_hi, lows[1]), best, eps)
        self._critical = (float(best), float(x_crit), float(y_crit))

    @property
    def critical_price(self):
        """``P = max{x + y : (x, y) in Z}``"""
        if self._critical is None:
            self._compute_critical()
        return self._critical[0]

    @property
    def critical_point(self):
        """``(x_crit, y_crit)``: the extreme points of the top diagonal"""
        if self._critical is None:
            self._compute_critical()
        return self._critical[1], self._critical[2]

    def s1(self, x):
        """Top outer boundary on ``[x_low, x_crit]``"""
        return self.upper(x)

    def s2(self, y):
        """Right outer boundary on ``[y_low, y_crit]``"""
        return self.rightmost(y)

    def _derivative(self, reach, curve, prime, values, lo, hi):
        values = np.atleast_1d(np.asarray(values, dtype=np.float64))
        out = np.empty(values.shape)
        step = 1e-6 * max(hi - lo, 1e-12)
        own = reach(values)
        use_prime = np.zeros(values.shape, dtype=bool)
        if curve is not None and prime is not None:
            on_curve = _as_array(curve, values)
            use_prime = np.abs(on_curve - own) <= 1e-10 * \
                max(1.0, np.nanmax(np.abs(own)))
            out[use_prime] = _as_array(prime, values[use_prime])
        rest = ~use_prime
        if rest.any():
            v = values[rest]
            a = np.maximum(v - step, lo)
            b = np.minimum(v + step, hi)
            out[rest] = (reach(b) - reach(a)) / (b - a)
        return out

    def s1_prime(self, x):
        x_crit = self.critical_point[0]
        return self._derivative(self.upper, self.top, self.top_prime, x,
                                self.box.lows[0], max(x_crit,
                                                      self.box.lows[0]))

    def s2_prime(self, y):
        y_crit = self.critical_point[1]
        return self._derivative(self.rightmost, self.right, self.right_prime,
                                y, self.box.lows[1], max(y_crit,
                                                         self.box.lows[1]))

    @classmethod
    def from_samples(cls, box, top_samples=None, right_samples=None,
                     price=None):
        """
        Exclusion set with monotone-cubic (PCHIP) curves through
        ``(t, value)`` samples
        """
        curves = {}
        for name, samples in (('top', top_samples),
                              ('right', right_samples)):
            if samples is None:
                curves[name] = curves[f"{name}_prime"] = None
                continue
            curves[name], curves[f"{name}_prime"] = monotone_curve(*samples)
        return cls(box, price=price, **curves)

    @classmethod
    def from_line_integrals(cls, mu, samples=40, bracket=None, config=None):
        """
        Curves where outward line integrals of ``mu`` vanish, then the
        diagonal cut at the critical price where ``mu(Z) = 0``

        Returns
        -------

        exclusion: ExclusionSet2D

        """
        tops = boundary_from_line_integrals(mu, 'vertical', samples=samples,
                                            config=config)
        rights = boundary_from_line_integrals(mu, 'horizontal',
                                              samples=samples, config=config)
        if tops[0].size < 2 or rights[0].size < 2:
            msg = "Error: Too few line-integral boundary samples to build "\
                  "an exclusion set"
            raise PreconditionError(msg)
        base = cls.from_samples(mu.box, top_samples=tops,
                                right_samples=rights)
        price = find_critical_price(mu, base.with_price, bracket=bracket,
                                    config=config)
        return base.with_price(price)

    def __repr__(self):
        return f"ExclusionSet2D(box={self.box}, price={self.price})"


@dataclass
class CanonicalPartition:
    """
    ``Z``, ``A = {x < x_crit} \\ Z``, ``B = {y < y_crit} \\ Z`` and the
    remainder ``W``
    """
    exclusion: ExclusionSet2D

    @property
    def price(self):
        return self.exclusion.critical_price

    @property
    def critical_point(self):
        return self.exclusion.critical_point

    def labels(self, points):
        """Index into ``PARTITION_LABELS`` for every point"""
        pts = as_points(points, 2)
        x_crit, y_crit = self.critical_point
        out = np.full(pts.shape[0], 3, dtype=int)
        out[pts[:, 1] < y_crit] = 2
        out[pts[:, 0] < x_crit] = 1
        out[np.asarray(self.exclusion.contains(pts), dtype=bool)] = 0
        return out

    def classify(self, points):
        return [PARTITION_LABELS[k] for k in self.labels(points)]

    def region(self, label):
        Z = self.exclusion
        x_crit, y_crit = self.critical_point
        outside = ComplementRegion(Z)
        if label == 'Z':
            return Z
        if label == 'A':
            return IntersectionRegion([
                HalfspaceRegion([1.0, 0.0], x_crit, strict=True), outside])
        if label == 'B':
            return IntersectionRegion([
                HalfspaceRegion([1.0, 0.0], x_crit, side='above'),
                HalfspaceRegion([0.0, 1.0], y_crit, strict=True), outside])
        if label == 'W':
            return IntersectionRegion([
                HalfspaceRegion([1.0, 0.0], x_crit, side='above'),
                HalfspaceRegion([0.0, 1.0], y_crit, side='above'), outside])
        msg = f"Error: Unknown partition label '{label}'. Expected one of "\
              f"{PARTITION_LABELS}"
        raise ValueError(msg)

    def to_dict(self, samples=33):
        Z = self.exclusion
        lows = Z.box.lows
        x_crit, y_crit = self.critical_point
        xs = np.linspace(lows[0], x_crit, samples)
        ys = np.linspace(lows[1], y_crit, samples)
        return {'box': Z.box.to_dict(), 'critical_price': self.price,
                'critical_point': [x_crit, y_crit],
                's1': {'x': xs.tolist(), 'y': Z.s1(xs).tolist()},
                's2': {'y': ys.tolist(), 'x': Z.s2(ys).tolist()}}


def canonical_partition(Z):
    """
    Canonical partition induced by ``Z``

    Raises
    ------

    PreconditionError
        ``Z`` has an empty interior

    """
    if Z.is_degenerate:
        msg = f"Error: The exclusion set {Z} has an empty interior"
        raise PreconditionError(msg)
    cp = CanonicalPartition(Z)
    P = cp.price
    x_crit, y_crit = cp.critical_point
    logger.info(f"Critical price {P:.10g} at ({x_crit:.6g}, {y_crit:.6g})")
    return cp


def _halfspace_utility(region, points, lows):
    """l1 distance to ``{w . z <= b}`` in the box (``w >= 0``)"""
    w = region.weights
    if np.any(w < 0) or region.side != 'below':
        msg = "Error: Only decreasing halfspaces {w . x <= b} with w >= 0 "\
              "are exclusion sets"
        raise PreconditionError(msg)
    pts = as_points(points, w.size)
    excess = pts @ w - region.offset
    out = np.zeros(pts.shape[0])
    order = np.argsort(-w)
    for k in np.nonzero(excess > 0)[0]:
        left = excess[k]
        for i in order:
            if w[i] <= 0 or left <= 0:
                break
            move = min(left / w[i], pts[k, i] - lows[i])
            out[k] += move
            left -= move * w[i]
        if left > 1e-12:
            out[k] = np.inf
    return out


def exclusion_utility(Z, points, lows=None):
    """
    ``u_Z(x) = min_{z in Z} |z - x|_1``

    Parameters
    ----------

    Z: ExclusionSet2D, CanonicalPartition or HalfspaceRegion, required
        Halfspaces ``{w . x <= b}`` (any number of items) need ``lows``

    points: array-like, required

    lows: array-like, optional, default: None
        Lowest type, for halfspace sets

    Returns
    -------

    utility: array

    """
    if isinstance(Z, HalfspaceRegion):
        if lows is None:
            lows = np.zeros(Z.ndim)
        return _halfspace_utility(Z, points, np.asarray(lows))
    cp = Z if isinstance(Z, CanonicalPartition) else CanonicalPartition(Z)
    ex = cp.exclusion
    pts = as_points(points, 2)
    labels = cp.labels(pts)
    out = np.zeros(pts.shape[0])
    a, b, w = labels == 1, labels == 2, labels == 3
    if a.any():
        out[a] = pts[a, 1] - ex.s1(pts[a, 0])
    if b.any():
        out[b] = pts[b, 0] - ex.s2(pts[b, 1])
    if w.any():
        out[w] = pts[w].sum(axis=1) - cp.price
    return out


def exclusion_utility_bruteforce(Z, points, samples=2001):
    """
    ``min |z - x|_1`` over ``z = (a, min(upper(a), x_2))`` for ``samples``
    abscissae ``a``; accurate to the sample spacing
    """
    pts = as_points(points, 2)
    lo = Z.box.lows[0]
    a = np.linspace(lo, Z.x_max, samples)
    top = Z.upper(a)
    keep = ~np.isnan(top)
    a, top = a[keep], top[keep]
    dist = np.abs(pts[:, 0:1] - a[None, :]) + \
        np.maximum(pts[:, 1:2] - top[None, :], 0.0)
    out = dist.min(axis=1)
    out[np.asarray(Z.contains(pts), dtype=bool)] = 0.0
    return out


class ExclusionMechanism(object):
    """
    Lottery and price for every type, read off the canonical partition:
    ``Z`` buys nothing, ``A`` buys ``(-s1'(x), 1)`` at ``s1 - x s1'``,
    ``B`` buys ``(1, -s2'(y))`` at ``s2 - y s2'``, ``W`` buys the bundle
    at the critical price
    """

    def __init__(self, partition, tol=1e-7, samples=65):
        self.partition = partition
        self.exclusion = partition.exclusion
        self.tol = float(tol)
        self._validate(samples)

    def _validate(self, samples):
        Z = self.exclusion
        lows = Z.box.lows
        x_crit, y_crit = self.partition.critical_point
        for label, lo, hi, deriv in (('A', lows[0], x_crit, Z.s1_prime),
                                     ('B', lows[1], y_crit, Z.s2_prime)):
            if hi <= lo:
                continue
            t = np.linspace(lo, hi, samples)[:-1]
            prob = -deriv(t)
            if np.any(prob < -self.tol) or np.any(prob > 1 + self.tol):
                worst = prob[np.argmax(np.abs(prob - 0.5))]
                msg = f"Error: The exclusion set gives region {label} an "\
                      f"allocation probability {worst:.6g} outside [0, 1]; "\
                      "its boundary is not concave with slopes in [-1, 0]"
                raise InvalidExclusionSetError(msg)

    def allocation(self, points):
        """
        Returns
        -------

        probs: array, shape (npoints, 2)

        prices: array, shape (npoints,)

        """
        pts = as_points(points, 2)
        Z = self.exclusion
        labels = self.partition.labels(pts)
        probs = np.zeros((pts.shape[0], 2))
        prices = np.zeros(pts.shape[0])
        a, b, w = labels == 1, labels == 2, labels == 3
        if a.any():
            x = pts[a, 0]
            d = Z.s1_prime(x)
            probs[a] = np.column_stack([np.clip(-d, 0.0, 1.0),
                                        np.ones(x.size)])
            prices[a] = Z.s1(x) - x * d
        if b.any():
            y = pts[b, 1]
            d = Z.s2_prime(y)
            probs[b] = np.column_stack([np.ones(y.size),
                                        np.clip(-d, 0.0, 1.0)])
            prices[b] = Z.s2(y) - y * d
        if w.any():
            probs[w] = 1.0
            prices[w] = self.partition.price
        return probs, prices

    def utility(self, points):
        pts = as_points(points, 2)
        probs, prices = self.allocation(pts)
        return np.sum(probs * pts, axis=1) - prices

    def boundary_item(self, strip, t):
        """
        Lottery and price the formula assigns to the boundary-curve point
        at ``t`` (``x`` for strip 'A', ``y`` for strip 'B'), also where
        the strip itself is empty
        """
        Z = self.exclusion
        if strip == 'A':
            curve, prime = Z.top, Z.top_prime
        elif strip == 'B':
            curve, prime = Z.right, Z.right_prime
        else:
            msg = f"Error: strip must be 'A' or 'B'. Got '{strip}'"
            raise ValueError(msg)
        if curve is None:
            msg = f"Error: The exclusion set has no curve for strip {strip}"
            raise PreconditionError(msg)
        t = float(t)
        value = float(_as_array(curve, np.array([t]))[0])
        if prime is not None:
            slope = float(_as_array(prime, np.array([t]))[0])
        else:
            step = 1e-6 * max(1.0, abs(t))
            slope = float((_as_array(curve, np.array([t + step]))[0] -
                           _as_array(curve, np.array([t - step]))[0]) /
                          (2 * step))
        price = value - t * slope
        p = (-slope, 1.0) if strip == 'A' else (1.0, -slope)
        return MenuItem(tuple(float(np.clip(v, 0.0, 1.0)) for v in p),
                        price)

    def revenue(self, f, config=None):
        """Expected payment under the product density ``f``"""
        total = 0.0
        lows, highs = f.box.lows, f.box.highs
        for label in PARTITION_LABELS[1:]:
            region = self.partition.region(label)

            def integrand(p):
                return self.allocation(p)[1] * f.pdf(p)
            total += integrate_region(integrand, region, lows, highs,
                                      config=config)
        return float(total)


def mechanism_from_partition(cp, tol=1e-7):
    """
    Mechanism of a canonical partition

    Raises
    ------

    InvalidExclusionSetError
        Some allocation probability falls outside [0, 1]

    """
    return ExclusionMechanism(cp, tol=tol)


def beta_factorization(f):
    """
    ``(alpha, beta, eta)`` with ``alpha = f_1``, ``beta = f_2`` and
    ``eta = (b1-1) x/(1-x) + (b2-1) y/(1-y) - (a1 + a2 + 1)`` for a product
    of Beta marginals; the interior density of the transformed measure is
    ``alpha(x) beta(y) eta(x, y)``
    """
    m1, m2 = f.marginals
    if m1.family != 'beta' or m2.family != 'beta':
        msg = "Error: The Beta factorization needs two Beta marginals"
        raise PreconditionError(msg)

    def eta(p):
        p = as_points(p, 2)
        x, y = p[:, 0], p[:, 1]
        return (m1.b - 1) * x / (1 - x) + (m2.b - 1) * y / (1 - y) - \
            (m1.a + m2.a + 1)

    return m1.pdf, m2.pdf, eta


FACTORIZATIONS = {'beta': beta_factorization}


def _registered_factorization(f):
    if f is None:
        return None
    families = {m.family for m in f.marginals}
    if len(families) == 1:
        builder = FACTORIZATIONS.get(families.pop())
        if builder is not None:
            return builder(f)
    return None


def _strip_condition(cp, mu, label, strips, levels, tol, config):
    Z = cp.exclusion
    lows, highs = Z.box.lows, Z.box.highs
    x_crit, y_crit = cp.critical_point
    axis = 0 if label == 'A' else 1
    end = x_crit if label == 'A' else y_crit
    entry = {'passed': True, 'strips': 0, 'worst_tail': 0.0,
             'worst_full': 0.0}
    if end <= lows[axis] + _EDGE:
        return entry
    region = cp.region(label)
    edges = np.linspace(lows[axis], end, strips + 1)
    other = 1 - axis
    starts = np.linspace(lows[other], highs[other], levels + 1)[:-1]
    worst_tail, worst_full = np.inf, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        for k, start in enumerate(starts):
            blo, bhi = lows.copy(), highs.copy()
            blo[axis], bhi[axis] = a, b
            blo[other] = start
            mass = region_mass(mu, IntersectionRegion(
                [BoxRegion(blo, bhi), region]), config=config)
            if k == 0:
                worst_full = max(worst_full, abs(mass))
            else:
                worst_tail = min(worst_tail, mass)
    entry.update({'strips': strips, 'worst_full': float(worst_full),
                  'worst_tail': float(worst_tail)})
    entry['passed'] = bool(worst_full <= tol and worst_tail >= -tol)
    return entry


def check_well_formed(cp, mu, grid=None, density=None, factorization=None,
                      strips=8, levels=6, tol=None, scheme='linear',
                      confirm_first_order=False, config=None):
    """
    Well-formedness of a canonical partition with respect to ``mu``

    Conditions
    ----------

    exclusion: ``mu|_Z <=_cvx 0`` (grid test)

    bundle: ``mu|_W >=_2 0``; the density-based first-order test runs
    first when a factorization is given or registered for ``density``'s
    family, the grid test otherwise (or when it is inconclusive)

    strips_A, strips_B: every vertical strip of ``A`` (horizontal strip of
    ``B``) has non-negative tail masses and zero total mass

    Parameters
    ----------

    grid: GridSpec, optional, default: None
        Defaults to 41 nodes per axis

    confirm_first_order: boolean, optional, default: False
        Also runs the grid coupling decider for ``mu_+|_W >=_1 mu_-|_W``
        and reports it under ``info``

    Returns
    -------

    report: MechanismReport

    """
    tol = DEFAULT_TOLERANCES['mass'] if tol is None else tol
    grid = GridSpec(mu.box, 41) if grid is None else grid
    Z = cp.exclusion
    W = cp.region('W')
    conditions, info = {}, {}

    with timed(logger, "Checking well-formedness of the canonical "
               "partition"):
        conditions['exclusion'] = region_dominance(mu, Z, (1, 1), grid,
                                                   scheme=scheme,
                                                   mass_tol=tol,
                                                   config=config)

        if factorization is None:
            factorization = _registered_factorization(density)
        entry = None
        # upper facets touch W; the density test only sees the interior
        w_facets = [fac for fac in mu.facets
                    if fac.value == mu.box.highs[fac.axis]]
        if factorization is not None and not w_facets:
            x_crit, y_crit = cp.critical_point
            lows = np.array([x_crit, y_crit])
            highs = mu.box.highs

            def g(p):
                p = as_points(p, 2)
                out = np.maximum(mu.raw_interior_density(p), 0.0)
                return np.where(Z.contains(p), 0.0, out)

            def h(p):
                p = as_points(p, 2)
                out = np.maximum(-mu.raw_interior_density(p), 0.0)
                return np.where(Z.contains(p), 0.0, out)

            try:
                res = check_regionthm(g, h, lows, highs, Z,
                                      factorization=factorization,
                                      mass_tol=tol, config=config)
                if res.dominates:
                    entry = {'passed': True, 'verdict': res.verdict,
                             'method': 'line-integrals',
                             'value': res.value}
                    entry.update(res.to_dict())
                else:
                    info['bundle_density_test'] = res.to_dict()
            except PreconditionError as err:
                info['bundle_density_test'] = {'error': str(err)}
        if entry is None:
            entry = region_dominance(mu, W, (-1, -1), grid, scheme=scheme,
                                     mass_tol=tol, config=config)
            entry['method'] = 'grid'
        conditions['bundle'] = entry

        if confirm_first_order:
            plus = discretize_measure(mu.positive_part().restrict(W), grid,
                                      scheme=scheme, config=config)
            minus = -discretize_measure(mu.negative_part().restrict(W),
                                        grid, scheme=scheme, config=config)
            if minus.total > 0:
                minus = minus * (plus.total / minus.total)
            res = first_order_dominates(plus, minus, tol=tol)
            info['bundle_first_order_grid'] = res.verdict

        for label in ('A', 'B'):
            conditions[f"strips_{label}"] = _strip_condition(
                cp, mu, label, strips, levels, tol, config)

    info.update({'critical_price': cp.price,
                 'critical_point': list(cp.critical_point)})
    return MechanismReport(conditions=conditions, info=info)


def find_critical_price(mu, family, bracket=None, scan=16, xtol=1e-9,
                        config=None):
    """
    Smallest ``p`` in ``bracket`` where ``mu(Z_p)`` changes sign from
    positive to negative

    Parameters
    ----------

    mu: TransformedMeasure, required

    family: callable, required
        ``p -> Region``

    bracket: (float, float), optional, default: None
        Defaults to ``(0, sum(highs - lows))``

    scan: integer, optional, default: 16
        Number of sub-intervals scanned for the first sign change

    xtol: float, optional, default: 1e-9

    Raises
    ------

    RootNotBracketedError
        No sign change inside the bracket

    """
    if bracket is None:
        bracket = (0.0, float(np.sum(mu.box.widths)))
    lo, hi = float(bracket[0]), float(bracket[1])

    def mass(p):
        return region_mass(mu, family(p), config=config)

    zero_tol = 1e-12
    prices = np.linspace(lo, hi, scan + 1)
    prev_p, prev_m = prices[0], mass(prices[0])
    with timed(logger, "Searching the critical price"):
        for p in prices[1:]:
            m = mass(p)
            if prev_m > zero_tol and m < -zero_tol:
                root = brentq(mass, prev_p, p, xtol=xtol)
                logger.info(f"Critical price {root:.10g}")
                return float(root)
            if abs(m) <= zero_tol and prev_m > zero_tol:
                return float(p)
            prev_p, prev_m = p, m
    msg = f"Error: mu(Z_p) does not change sign on [{lo:g}, {hi:g}]"
    raise RootNotBracketedError(msg)


def boundary_from_line_integrals(mu, axis='vertical', abscissae=None,
                                 samples=40, scan=64, config=None):
    """
    Points where the outward line integral of ``mu`` vanishes

    For ``axis='vertical'`` and every abscissa ``x``, returns the largest
    ``y`` below the top edge with ``int_y^high mu(x, t) dt = 0`` (the top
    facet density included). ``'horizontal'`` swaps the roles. Abscissae
    without such a point are dropped.

    Returns
    -------

    abscissae, ordinates: arrays

    """
    if mu.ndim != 2:
        msg = f"Error: Line-integral boundaries need two items. Got "\
              f"{mu.ndim}"
        raise UnsupportedDimensionError(msg)
    if axis not in ('vertical', 'horizontal'):
        msg = f"Error: axis must be 'vertical' or 'horizontal'. Got '{axis}'"
        raise ValueError(msg)
    along = 1 if axis == 'vertical' else 0
    fixed = 1 - along
    lows, highs = mu.box.lows, mu.box.highs
    config = QuadratureConfig() if config is None else config
    if abscissae is None:
        abscissae = np.linspace(lows[fixed], highs[fixed], samples + 1)[:-1]
    abscissae = np.asarray(abscissae, dtype=np.float64)
    facets = [fac for fac in mu.active_facets()
              if fac.axis == along and fac.value == highs[along]]

    kept, ords = [], []
    for val in abscissae:
        def line(t, val=val):
            p = np.empty((np.size(t), 2))
            p[:, fixed] = val
            p[:, along] = t
            return mu.interior_density(p)

        end = np.empty((1, 2))
        end[0, fixed] = val
        end[0, along] = highs[along]
        cap = sum(float(mu.facet_density(fac, end)[0]) for fac in facets)

        def tail(s):
            return integrate_interval(line, s, highs[along],
                                      config=config) + cap

        width = highs[along] - lows[along]
        ts = np.linspace(highs[along], lows[along], scan + 1)[1:]
        prev_t = highs[along] - 1e-6 * width
        prev = tail(prev_t)
        root = None
        for t in ts:
            cur = tail(t)
            if prev > 0 >= cur:
                root = brentq(tail, t, prev_t, xtol=1e-13) if cur < 0 \
                    else t
                break
            prev_t, prev = t, cur
        if root is not None:
            kept.append(val)
            ords.append(root)
    return np.asarray(kept), np.asarray(ords)
