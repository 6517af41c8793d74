# -*- coding: utf-8 -*-

"""
Regions
=======
Measurable subsets of the type box. Every region answers membership
queries and can be sliced along an axis; the slices are what the iterated
quadrature in :mod:`~mdopt.quadrature` integrates over. Boxes, halfspaces
and their intersections/complements also integrate products of affine
factors exactly.
"""

__author__ = "mdopt developers"
__all__ = ["Region", "EmptyRegion", "IntervalSetRegion", "BoxRegion",
           "HalfspaceRegion", "IntersectionRegion", "UnionRegion",
           "ComplementRegion", "PredicateRegion", "CurveRegion",
           "GridMaskRegion", "BaseUnionRegion", "polynomial_box_integral",
           "polynomial_halfspace_integral", ]

import itertools
from math import factorial

import numpy as np

from .utils import as_points


def _insert_column(points, axis, value):
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    return np.insert(pts, axis, value, axis=1)


def _clean_intervals(intervals):
    return [(float(a), float(b)) for a, b in intervals if b > a]


def _merge_intervals(intervals):
    intervals = sorted(_clean_intervals(intervals))
    merged = []
    for a, b in intervals:
        if merged and a <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    return merged


def _intersect_intervals(first, second):
    out = []
    for a, b in first:
        for c, d in second:
            lo, hi = max(a, c), min(b, d)
            if hi > lo:
                out.append((lo, hi))
    return _merge_intervals(out)


def _complement_intervals(intervals, lo, hi):
    out = []
    start = lo
    for a, b in _merge_intervals(intervals):
        if a > start:
            out.append((start, min(a, hi)))
        start = max(start, b)
    if hi > start:
        out.append((start, hi))
    return _clean_intervals(out)


def polynomial_box_integral(lows, highs, factors):
    """
    Integral of ``prod_i (c_i + d_i x_i)`` over the box ``[lows, highs]``;
    ``factors`` has shape (n, 2) holding ``(c_i, d_i)``
    """
    lows = np.asarray(lows, dtype=np.float64)
    highs = np.asarray(highs, dtype=np.float64)
    if lows.size == 0:
        return 1.0
    if np.any(highs <= lows):
        return 0.0
    factors = np.asarray(factors, dtype=np.float64).reshape(-1, 2)
    c, d = factors[:, 0], factors[:, 1]
    return float(np.prod(c * (highs - lows) + 0.5 * d * (highs**2 - lows**2)))


def polynomial_halfspace_integral(lows, highs, weights, offset, factors):
    """
    Exact integral of ``prod_i (c_i + d_i x_i)`` over
    ``[lows, highs] ∩ {weights . x <= offset}``.

    Axes with zero weight factor out. The others are reflected to positive
    weight and rescaled to ``y_i = w_i (x_i - l_i)`` so the domain becomes a
    simplex clipped by the box ``y_i <= a_i``; inclusion-exclusion over the
    clipped faces leaves simplices, whose moments of square-free monomials
    are ``t**(m + |T|)/(m + |T|)!``.
    """
    lows = np.asarray(lows, dtype=np.float64)
    highs = np.asarray(highs, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    factors = np.asarray(factors, dtype=np.float64).reshape(-1, 2)
    if np.any(highs <= lows):
        return 0.0

    zero = weights == 0
    const = polynomial_box_integral(lows[zero], highs[zero], factors[zero])
    active = ~zero
    m = int(active.sum())
    if m == 0:
        return const if offset >= 0 else 0.0

    w = weights[active]
    lo, hi = lows[active], highs[active]
    c, d = factors[active, 0].copy(), factors[active, 1].copy()
    neg = w < 0
    lo, hi = np.where(neg, -hi, lo), np.where(neg, -lo, hi)
    d = np.where(neg, -d, d)
    w = np.abs(w)

    a = w * (hi - lo)
    t = offset - float(np.sum(w * lo))
    if t <= 0:
        return 0.0
    if t >= a.sum():
        return const * polynomial_box_integral(lo, hi, np.column_stack([c, d]))

    alpha = c + d * lo
    beta = d / w
    facts = [factorial(k) for k in range(2 * m + 1)]
    total = 0.0
    for subset in itertools.product((0, 1), repeat=m):
        subset = np.array(subset, dtype=bool)
        tau = t - float(a[subset].sum())
        if tau <= 0:
            continue
        gamma = np.where(subset, alpha + beta * a, alpha)
        inner = 0.0
        for mono in itertools.product((0, 1), repeat=m):
            mono = np.array(mono, dtype=bool)
            k = m + int(mono.sum())
            coef = float(np.prod(np.where(mono, beta, gamma)))
            inner += coef * tau**k / facts[k]
        total += -inner if subset.sum() % 2 else inner

    return const * total / float(np.prod(w))


class Region(object):
    """
    Base class. Sub-classes implement ``contains``; everything else has a
    sampling-based fallback that only relies on membership.
    """
    kind = 'generic'

    def __init__(self, ndim):
        self.ndim = int(ndim)

    def contains(self, points):
        raise NotImplementedError

    def section(self, axis, t):
        """The (ndim-1)-dimensional slice ``{y : insert(y, axis, t) in R}``"""
        if self.ndim < 2:
            raise ValueError("Error: Cannot slice a one-dimensional region")
        parent = self
        return PredicateRegion(self.ndim - 1,
                               lambda y: parent.contains(
                                   _insert_column(y, axis, t)))

    def intervals(self, lo, hi, samples=257):
        """
        Sorted disjoint intervals covering the region inside ``[lo, hi]``
        (one-dimensional regions only). The fallback samples membership and
        bisects every change of state.
        """
        if self.ndim != 1:
            raise ValueError("Error: intervals() needs a 1-d region")
        if hi <= lo:
            return []
        ts = np.linspace(lo, hi, samples)
        inside = np.asarray(self.contains(ts[:, None]), dtype=bool)
        edges = []
        for k in np.nonzero(inside[1:] != inside[:-1])[0]:
            a, b = ts[k], ts[k + 1]
            state_a = inside[k]
            for _ in range(60):
                mid = 0.5 * (a + b)
                if bool(self.contains(np.array([[mid]]))[0]) == state_a:
                    a = mid
                else:
                    b = mid
            edges.append(0.5 * (a + b))
        out = []
        start = lo if inside[0] else None
        for edge in edges:
            if start is None:
                start = edge
            else:
                out.append((start, edge))
                start = None
        if start is not None:
            out.append((start, hi))
        return _clean_intervals(out)

    def breakpoints(self, axis, lows, highs):
        """Coordinates along ``axis`` where slices change shape"""
        return []

    def integrate_polynomial(self, lows, highs, factors):
        """
        Exact integral of a product of affine factors over the region
        within ``[lows, highs]``, or ``None`` when no closed form exists
        """
        return None

    def __and__(self, other):
        return IntersectionRegion([self, other])

    def __or__(self, other):
        return UnionRegion([self, other])

    def __invert__(self):
        return ComplementRegion(self)


class EmptyRegion(Region):
    kind = 'empty'

    def contains(self, points):
        pts = as_points(points, self.ndim)
        return np.zeros(pts.shape[0], dtype=bool)

    def section(self, axis, t):
        return EmptyRegion(self.ndim - 1)

    def intervals(self, lo, hi, samples=257):
        return []

    def integrate_polynomial(self, lows, highs, factors):
        return 0.0


class IntervalSetRegion(Region):
    """Finite union of intervals on the real line"""
    kind = 'intervals'

    def __init__(self, intervals):
        super().__init__(1)
        self._intervals = _merge_intervals(intervals)

    def contains(self, points):
        pts = as_points(points, 1)[:, 0]
        out = np.zeros(pts.shape[0], dtype=bool)
        for a, b in self._intervals:
            out |= (pts >= a) & (pts <= b)
        return out

    def intervals(self, lo, hi, samples=257):
        return _intersect_intervals(self._intervals, [(lo, hi)])

    def integrate_polynomial(self, lows, highs, factors):
        return sum(polynomial_box_integral([a], [b], factors)
                   for a, b in self.intervals(lows[0], highs[0]))


class BoxRegion(Region):
    """Closed box ``[lows, highs]``; infinite bounds are allowed"""
    kind = 'box'

    def __init__(self, lows, highs):
        lows = np.atleast_1d(np.asarray(lows, dtype=np.float64))
        highs = np.atleast_1d(np.asarray(highs, dtype=np.float64))
        super().__init__(lows.size)
        self.lows = lows
        self.highs = highs

    def contains(self, points):
        pts = as_points(points, self.ndim)
        return np.all((pts >= self.lows) & (pts <= self.highs), axis=1)

    def section(self, axis, t):
        if self.lows[axis] <= t <= self.highs[axis]:
            return BoxRegion(np.delete(self.lows, axis),
                             np.delete(self.highs, axis))
        return EmptyRegion(self.ndim - 1)

    def intervals(self, lo, hi, samples=257):
        return _intersect_intervals([(self.lows[0], self.highs[0])],
                                    [(lo, hi)])

    def breakpoints(self, axis, lows, highs):
        return [v for v in (self.lows[axis], self.highs[axis])
                if lows[axis] < v < highs[axis]]

    def clip(self, lows, highs):
        return np.maximum(lows, self.lows), np.minimum(highs, self.highs)

    def integrate_polynomial(self, lows, highs, factors):
        lo, hi = self.clip(np.asarray(lows), np.asarray(highs))
        return polynomial_box_integral(lo, hi, factors)


class HalfspaceRegion(Region):
    """
    ``{x : w . x <= offset}`` (side='below') or ``{x : w . x >= offset}``
    (side='above'); ``strict`` turns the inequality strict
    """
    kind = 'halfspace'

    def __init__(self, weights, offset, side='below', strict=False):
        weights = np.atleast_1d(np.asarray(weights, dtype=np.float64))
        super().__init__(weights.size)
        if side not in ('below', 'above'):
            msg = f"Error: side must be 'below' or 'above'. Got '{side}'"
            raise ValueError(msg)
        self.weights = weights
        self.offset = float(offset)
        self.side = side
        self.strict = bool(strict)

    def contains(self, points):
        pts = as_points(points, self.ndim)
        val = pts @ self.weights
        if self.side == 'below':
            return val < self.offset if self.strict else val <= self.offset
        return val > self.offset if self.strict else val >= self.offset

    def section(self, axis, t):
        return HalfspaceRegion(np.delete(self.weights, axis),
                               self.offset - self.weights[axis] * t,
                               side=self.side, strict=self.strict)

    def intervals(self, lo, hi, samples=257):
        w, s = self.weights[0], self.offset
        if w == 0:
            keep = bool(self.contains(np.array([[0.0]]))[0])
            return [(lo, hi)] if keep and hi > lo else []
        root = s / w
        upper = (self.side == 'below') == (w > 0)
        if upper:
            return _intersect_intervals([(-np.inf, root)], [(lo, hi)])
        return _intersect_intervals([(root, np.inf)], [(lo, hi)])

    def breakpoints(self, axis, lows, highs):
        w = self.weights
        if w[axis] == 0:
            return []
        others = [i for i in range(self.ndim) if i != axis]
        out = []
        for corner in itertools.product(*[(lows[i], highs[i])
                                          for i in others]):
            val = (self.offset - np.dot(w[others], corner)) / w[axis]
            if lows[axis] < val < highs[axis]:
                out.append(float(val))
        return sorted(set(out))

    def integrate_polynomial(self, lows, highs, factors):
        below = polynomial_halfspace_integral(lows, highs, self.weights,
                                              self.offset, factors)
        if self.side == 'below':
            return below
        return polynomial_box_integral(lows, highs, factors) - below

    def flipped(self):
        """Complement as a halfspace (up to the boundary hyperplane)"""
        side = 'above' if self.side == 'below' else 'below'
        return HalfspaceRegion(self.weights, self.offset, side=side,
                               strict=not self.strict)


class IntersectionRegion(Region):
    kind = 'intersection'

    def __init__(self, regions):
        regions = list(regions)
        if not regions:
            raise ValueError("Error: Need at least one region to intersect")
        super().__init__(regions[0].ndim)
        flat = []
        for reg in regions:
            if isinstance(reg, IntersectionRegion):
                flat.extend(reg.regions)
            else:
                flat.append(reg)
        self.regions = tuple(flat)

    def contains(self, points):
        pts = as_points(points, self.ndim)
        out = np.ones(pts.shape[0], dtype=bool)
        for reg in self.regions:
            out &= np.asarray(reg.contains(pts), dtype=bool)
        return out

    def section(self, axis, t):
        parts = [reg.section(axis, t) for reg in self.regions]
        if any(isinstance(p, EmptyRegion) for p in parts):
            return EmptyRegion(self.ndim - 1)
        return IntersectionRegion(parts)

    def intervals(self, lo, hi, samples=257):
        out = [(lo, hi)]
        for reg in self.regions:
            out = _intersect_intervals(out, reg.intervals(lo, hi, samples))
            if not out:
                break
        return out

    def breakpoints(self, axis, lows, highs):
        out = set()
        for reg in self.regions:
            out.update(reg.breakpoints(axis, lows, highs))
        planes = [reg for reg in self.regions
                  if isinstance(reg, HalfspaceRegion)]
        if self.ndim == 2 and len(planes) > 1:
            for first, second in itertools.combinations(planes, 2):
                mat = np.vstack([first.weights, second.weights])
                if abs(np.linalg.det(mat)) < 1e-14:
                    continue
                point = np.linalg.solve(mat, [first.offset, second.offset])
                if lows[axis] < point[axis] < highs[axis]:
                    out.add(float(point[axis]))
        return sorted(out)

    def integrate_polynomial(self, lows, highs, factors):
        lo = np.asarray(lows, dtype=np.float64).copy()
        hi = np.asarray(highs, dtype=np.float64).copy()
        rest = []
        for reg in self.regions:
            if isinstance(reg, BoxRegion):
                lo, hi = reg.clip(lo, hi)
            elif isinstance(reg, EmptyRegion):
                return 0.0
            elif isinstance(reg, ComplementRegion) and \
                    isinstance(reg.region, HalfspaceRegion):
                rest.append(reg.region.flipped())
            else:
                rest.append(reg)
        if np.any(hi <= lo):
            return 0.0
        if not rest:
            return polynomial_box_integral(lo, hi, factors)
        if len(rest) == 1:
            return rest[0].integrate_polynomial(lo, hi, factors)
        return None


class UnionRegion(Region):
    kind = 'union'

    def __init__(self, regions):
        regions = list(regions)
        if not regions:
            raise ValueError("Error: Need at least one region for a union")
        super().__init__(regions[0].ndim)
        self.regions = tuple(regions)

    def contains(self, points):
        pts = as_points(points, self.ndim)
        out = np.zeros(pts.shape[0], dtype=bool)
        for reg in self.regions:
            out |= np.asarray(reg.contains(pts), dtype=bool)
        return out

    def section(self, axis, t):
        return UnionRegion([reg.section(axis, t) for reg in self.regions])

    def intervals(self, lo, hi, samples=257):
        out = []
        for reg in self.regions:
            out.extend(reg.intervals(lo, hi, samples))
        return _merge_intervals(out)

    def breakpoints(self, axis, lows, highs):
        out = set()
        for reg in self.regions:
            out.update(reg.breakpoints(axis, lows, highs))
        return sorted(out)

    def integrate_polynomial(self, lows, highs, factors):
        if len(self.regions) == 1:
            return self.regions[0].integrate_polynomial(lows, highs, factors)
        return None


class ComplementRegion(Region):
    """Everything (inside the integration box) not in ``region``"""
    kind = 'complement'

    def __init__(self, region):
        super().__init__(region.ndim)
        self.region = region

    def contains(self, points):
        return ~np.asarray(self.region.contains(points), dtype=bool)

    def section(self, axis, t):
        return ComplementRegion(self.region.section(axis, t))

    def intervals(self, lo, hi, samples=257):
        return _complement_intervals(self.region.intervals(lo, hi, samples),
                                     lo, hi)

    def breakpoints(self, axis, lows, highs):
        return self.region.breakpoints(axis, lows, highs)

    def integrate_polynomial(self, lows, highs, factors):
        inner = self.region.integrate_polynomial(lows, highs, factors)
        if inner is None:
            return None
        return polynomial_box_integral(lows, highs, factors) - inner


class PredicateRegion(Region):
    """Region given only by a vectorised membership function"""
    kind = 'predicate'

    def __init__(self, ndim, predicate, kind=None):
        super().__init__(ndim)
        self.predicate = predicate
        if kind is not None:
            self.kind = kind

    def contains(self, points):
        pts = as_points(points, self.ndim)
        return np.asarray(self.predicate(pts), dtype=bool)


class CurveRegion(Region):
    """
    Two-item region ``{(x, y) : lower(x) <= y <= upper(x)}``; either curve
    may be ``None`` (unbounded)
    """
    kind = 'below-curve'

    def __init__(self, lower=None, upper=None, kinks=()):
        super().__init__(2)
        self.lower = lower
        self.upper = upper
        self.kinks = tuple(float(k) for k in kinks)

    def _bounds(self, x):
        x = np.asarray(x, dtype=np.float64)
        lo = np.full_like(x, -np.inf) if self.lower is None else \
            np.asarray(self.lower(x), dtype=np.float64)
        hi = np.full_like(x, np.inf) if self.upper is None else \
            np.asarray(self.upper(x), dtype=np.float64)
        return lo, hi

    def contains(self, points):
        pts = as_points(points, 2)
        lo, hi = self._bounds(pts[:, 0])
        return (pts[:, 1] >= lo) & (pts[:, 1] <= hi)

    def section(self, axis, t):
        if axis == 0:
            lo, hi = self._bounds(np.array([t]))
            return IntervalSetRegion([(lo[0], hi[0])])
        return super().section(axis, t)

    def breakpoints(self, axis, lows, highs):
        if axis != 0:
            return []
        return [k for k in self.kinks if lows[0] < k < highs[0]]


class GridMaskRegion(Region):
    """
    Union of the Voronoi cells of the flagged lattice nodes

    Parameters
    ----------

    lows: array-like, required
        Coordinates of the first lattice node

    spacing: array-like, required
        Node spacing along every axis

    mask: boolean array, required
        One flag per node, shaped like the lattice

    """
    kind = 'grid-mask'

    def __init__(self, lows, spacing, mask):
        mask = np.asarray(mask, dtype=bool)
        super().__init__(mask.ndim)
        self.lows = np.asarray(lows, dtype=np.float64)
        self.spacing = np.asarray(spacing, dtype=np.float64)
        self.mask = mask

    def contains(self, points):
        pts = as_points(points, self.ndim)
        idx = np.ceil((pts - self.lows) / self.spacing - 0.5).astype(int)
        shape = np.array(self.mask.shape)
        valid = np.all((idx >= 0) & (idx < shape), axis=1)
        out = np.zeros(pts.shape[0], dtype=bool)
        if valid.any():
            out[valid] = self.mask[tuple(idx[valid].T)]
        return out

    def breakpoints(self, axis, lows, highs):
        n = self.mask.shape[axis]
        edges = self.lows[axis] + (np.arange(n - 1) + 0.5) * \
            self.spacing[axis]
        return [float(e) for e in edges if lows[axis] < e < highs[axis]]


class BaseUnionRegion(Region):
    """``Union_z {z' : z' >= z}`` over a finite set of roots"""
    kind = 'base-union'

    def __init__(self, roots, ndim=None):
        roots = np.asarray(roots, dtype=np.float64)
        if roots.size == 0:
            if ndim is None:
                raise ValueError("Error: Need ndim for an empty base union")
            roots = roots.reshape(0, ndim)
        elif roots.ndim == 1:
            roots = roots.reshape(1, -1)
        super().__init__(roots.shape[1])
        self.roots = roots

    def contains(self, points):
        pts = as_points(points, self.ndim)
        if self.roots.shape[0] == 0:
            return np.zeros(pts.shape[0], dtype=bool)
        return np.any(np.all(pts[:, None, :] >= self.roots[None, :, :],
                             axis=2), axis=1)

    def section(self, axis, t):
        keep = self.roots[:, axis] <= t
        if not keep.any():
            return EmptyRegion(self.ndim - 1)
        return BaseUnionRegion(np.delete(self.roots[keep], axis, axis=1),
                               ndim=self.ndim - 1)

    def intervals(self, lo, hi, samples=257):
        if self.roots.shape[0] == 0:
            return []
        return _intersect_intervals([(self.roots[:, 0].min(), np.inf)],
                                    [(lo, hi)])

    def breakpoints(self, axis, lows, highs):
        vals = np.unique(self.roots[:, axis])
        return [float(v) for v in vals if lows[axis] < v < highs[axis]]
