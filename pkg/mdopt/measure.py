# -*- coding: utf-8 -*-

"""
Transformed Measure
===================
Signed measure whose integral against a utility function is the expected
revenue of the mechanism with that utility. For a density ``f`` on the box
``X`` it consists of

* a unit atom at the lowest type,
* the interior density ``-(grad f(x) . x + (n+1) f(x))``,
* the facet densities ``f(x) (x . n_hat)`` on the boundary of ``X``.

For product densities every piece is a sum of separable terms
``coef * prod_j g_j(x_j)``; that is how they are stored here, so that
lattice discretisation can integrate axis by axis.
"""

__author__ = "mdopt developers"
__all__ = ["SeparableTerm", "Facet", "TransformedMeasure",
           "build_transformed", "region_mass", "restrict",
           "single_item_marginal_density", "probability",
           "total_variation", "measure_to_dict", ]

from collections import namedtuple

import numpy as np

from .quadrature import integrate_region
from .regions import BoxRegion, IntersectionRegion
from .utils import as_points, get_logger

logger = get_logger(__name__)

# ``factors[j]`` is a vectorised 1-d callable or ``None`` for the constant 1
SeparableTerm = namedtuple('SeparableTerm', ['coef', 'factors'])

# Surface density ``coef * prod_{j != axis} factors[j](x_j)`` on
# ``{x_axis = value}``; ``factors[axis]`` is unused
Facet = namedtuple('Facet', ['axis', 'value', 'coef', 'factors'])


def evaluate_terms(terms, pts):
    out = np.zeros(pts.shape[0])
    for term in terms:
        val = np.full(pts.shape[0], float(term.coef))
        for j, fac in enumerate(term.factors):
            if fac is not None:
                val = val * fac(pts[:, j])
        out += val
    return out


def _is_constant(terms):
    return all(fac is None for term in terms for fac in term.factors)


class TransformedMeasure(object):
    """
    Signed measure made of atoms, a separable interior density and
    separable facet densities on a box; optionally restricted to a region
    and/or to one sign

    Parameters
    ----------

    box: Box, required

    atoms: list of (point, mass), required

    interior_terms: list of SeparableTerm, required

    facets: list of Facet, required

    region: Region, optional, default: None
        Restriction. ``None`` means the whole box

    part: string, optional, default: None
        ``'positive'`` keeps ``max(mu, 0)``, ``'negative'`` keeps
        ``min(mu, 0)`` (so the negative part stays non-positive and
        ``mu = positive + negative``)

    """

    def __init__(self, box, atoms, interior_terms, facets, region=None,
                 part=None):
        if part not in (None, 'positive', 'negative'):
            msg = f"Error: part must be None, 'positive' or 'negative'. "\
                  f"Got '{part}'"
            raise ValueError(msg)
        self.box = box
        self.atoms = [(np.asarray(p, dtype=np.float64), float(m))
                      for p, m in atoms]
        self.interior_terms = list(interior_terms)
        self.facets = list(facets)
        self.region = region
        self.part = part

    @property
    def ndim(self):
        return self.box.ndim

    @property
    def has_constant_density(self):
        return _is_constant(self.interior_terms)

    def _clip(self, values):
        if self.part == 'positive':
            return np.maximum(values, 0.0)
        if self.part == 'negative':
            return np.minimum(values, 0.0)
        return values

    def _keep_sign(self, value):
        if self.part == 'positive':
            return value > 0
        if self.part == 'negative':
            return value < 0
        return value != 0

    def _inside(self, pts):
        if self.region is None:
            return np.ones(pts.shape[0], dtype=bool)
        return np.asarray(self.region.contains(pts), dtype=bool)

    def interior_density(self, points):
        """Interior density (with restriction and sign applied)"""
        pts = as_points(points, self.ndim)
        vals = self._clip(evaluate_terms(self.interior_terms, pts))
        return np.where(self._inside(pts), vals, 0.0)

    def raw_interior_density(self, points):
        """Interior density ignoring restriction and sign"""
        return evaluate_terms(self.interior_terms,
                               as_points(points, self.ndim))

    def facet_density(self, facet, points):
        """Density of ``facet`` at points given with all n coordinates"""
        pts = as_points(points, self.ndim)
        val = np.full(pts.shape[0], float(facet.coef))
        for j, fac in enumerate(facet.factors):
            if j != facet.axis and fac is not None:
                val = val * fac(pts[:, j])
        return np.where(self._inside(pts), self._clip(val), 0.0)

    def active_atoms(self):
        out = []
        for point, mass in self.atoms:
            if self._keep_sign(mass) and self._inside(point[None, :])[0]:
                out.append((point, mass))
        return out

    def active_facets(self):
        """
        Facets that can carry mass after the sign restriction. Facet
        factors are marginal densities, so the sign is that of ``coef``
        """
        return [fac for fac in self.facets if self._keep_sign(fac.coef)]

    def effective_region(self, region=None):
        """``region`` intersected with the restriction (``None`` = box)"""
        if region is None:
            return self.region
        if self.region is None:
            return region
        return IntersectionRegion([self.region, region])

    def restrict(self, region):
        return TransformedMeasure(self.box, self.atoms, self.interior_terms,
                                  self.facets,
                                  region=self.effective_region(region),
                                  part=self.part)

    def positive_part(self):
        return TransformedMeasure(self.box, self.atoms, self.interior_terms,
                                  self.facets, region=self.region,
                                  part='positive')

    def negative_part(self):
        return TransformedMeasure(self.box, self.atoms, self.interior_terms,
                                  self.facets, region=self.region,
                                  part='negative')

    def __repr__(self):
        return f"TransformedMeasure(box={self.box}, atoms={len(self.atoms)}"\
               f", interior_terms={len(self.interior_terms)}, "\
               f"facets={len(self.facets)}, part={self.part})"


def build_transformed(f):
    """
    Transformed measure of a product density ``f``

    Uniform coordinates contribute no ``x f'`` term and constant factors
    are folded into the coefficients, so a uniform product gives a
    constant interior density.
    """
    n = f.ndim
    box = f.box
    marginals = f.marginals

    def factor(m):
        if m.is_uniform:
            return None
        return m.pdf

    def scale(m):
        return float(m.pdf(0.5 * (m.low + m.high))) if m.is_uniform else 1.0

    base_coef = float(np.prod([scale(m) for m in marginals]))

    interior = []
    for i, mi in enumerate(marginals):
        if mi.is_uniform:
            continue
        coef = -base_coef
        factors = [factor(m) for m in marginals]
        factors[i] = mi.x_dpdf
        interior.append(SeparableTerm(coef, tuple(factors)))
    interior.append(SeparableTerm(-(n + 1) * base_coef,
                                  tuple(factor(m) for m in marginals)))

    facets = []
    for i, mi in enumerate(marginals):
        others = base_coef / scale(mi)
        factors = tuple(None if j == i else factor(m)
                        for j, m in enumerate(marginals))
        top = box.highs[i] * float(mi.pdf(box.highs[i])) * others
        if top != 0:
            facets.append(Facet(i, float(box.highs[i]), top, factors))
        bottom = -box.lows[i] * float(mi.pdf(box.lows[i])) * others
        if bottom != 0:
            facets.append(Facet(i, float(box.lows[i]), bottom, factors))

    atoms = [(box.lows.copy(), 1.0)]
    return TransformedMeasure(box, atoms, interior, facets)


def _constant_integral(region, lows, highs, ndim):
    """Exact volume of ``region`` inside the box, or ``None``"""
    unit = np.tile([1.0, 0.0], (ndim, 1))
    if region is None:
        region = BoxRegion(lows, highs)
    return region.integrate_polynomial(lows, highs, unit)


def region_mass(mu, region=None, config=None):
    """
    Signed mass ``mu(A)``: atoms in ``A`` plus the interior integral plus
    the facet integrals over ``A``

    Parameters
    ----------

    mu: TransformedMeasure, required

    region: Region, optional, default: None
        ``None`` measures the whole box (or ``mu``'s own restriction)

    config: QuadratureConfig, optional, default: None

    Returns
    -------

    mass: float

    """
    n = mu.ndim
    lows, highs = mu.box.lows, mu.box.highs
    reg = mu.effective_region(region)

    def inside(pts):
        if reg is None:
            return np.ones(pts.shape[0], dtype=bool)
        return np.asarray(reg.contains(pts), dtype=bool)

    total = 0.0
    for point, mass in mu.atoms:
        if mu._keep_sign(mass) and inside(point[None, :])[0]:
            total += mass

    # interior
    if mu.has_constant_density:
        coef = sum(t.coef for t in mu.interior_terms)
        exact = None
        if mu._keep_sign(coef):
            exact = _constant_integral(reg, lows, highs, n)
            if exact is not None:
                total += coef * exact
        if exact is None and mu._keep_sign(coef):
            total += integrate_region(
                lambda p: np.full(p.shape[0], coef),
                reg if reg is not None else BoxRegion(lows, highs),
                lows, highs, config=config)
    else:
        domain = reg if reg is not None else BoxRegion(lows, highs)
        total += integrate_region(
            lambda p: mu._clip(evaluate_terms(mu.interior_terms, p)),
            domain, lows, highs, config=config)

    # facets
    for facet in mu.active_facets():
        axis, value = facet.axis, facet.value
        if n == 1:
            if inside(np.array([[value]]))[0]:
                total += facet.coef
            continue
        sub_lows = np.delete(lows, axis)
        sub_highs = np.delete(highs, axis)
        sub = BoxRegion(sub_lows, sub_highs) if reg is None else \
            reg.section(axis, value)
        factors = [fac for j, fac in enumerate(facet.factors) if j != axis]
        if all(fac is None for fac in factors):
            exact = sub.integrate_polynomial(
                sub_lows, sub_highs, np.tile([1.0, 0.0], (n - 1, 1)))
            if exact is not None:
                total += facet.coef * exact
                continue

        def surface(p, facet=facet, factors=factors):
            val = np.full(p.shape[0], float(facet.coef))
            for j, fac in enumerate(factors):
                if fac is not None:
                    val = val * fac(p[:, j])
            return val

        total += integrate_region(surface, sub, sub_lows, sub_highs,
                                  config=config)
    return float(total)


def restrict(mu, region):
    """``mu|_A``; ``region=None`` returns ``mu`` itself"""
    if region is None:
        return mu
    return mu.restrict(region)


def total_variation(mu, config=None):
    """``|mu|(X) = mu_+(X) - mu_-(X)``"""
    return region_mass(mu.positive_part(), config=config) - \
        region_mass(mu.negative_part(), config=config)


def single_item_marginal_density(m):
    """
    One-item transformed measure of marginal ``m``

    Returns
    -------

    density: callable
        ``z -> -(2 f(z) + z f'(z))``, i.e. minus the derivative of
        ``z f(z) - (1 - F(z))``

    atoms: list of (z, mass)
        ``(low, 1 - low f(low))`` and ``(high, high f(high))``

    """
    def density(z):
        z = np.asarray(z, dtype=np.float64)
        return -(2.0 * m.pdf(z) + m.x_dpdf(z))

    atoms = [(m.low, 1.0 - m.low * float(m.pdf(m.low))),
             (m.high, m.high * float(m.pdf(m.high)))]
    return density, atoms


def probability(f, region, config=None):
    """``Pr_f[A]`` for a product density ``f`` and region ``A``"""
    lows, highs = f.box.lows, f.box.highs
    if f.is_uniform:
        exact = _constant_integral(region, lows, highs, f.ndim)
        if exact is not None:
            return float(exact / f.box.volume)
    return float(integrate_region(f.pdf, region, lows, highs,
                                  config=config))


def measure_to_dict(mu, nodes=11):
    """
    Debug dump: atoms, interior density samples on a ``nodes``-per-axis
    lattice, and facet density samples on the same lattice restricted to
    each facet
    """
    axes = [np.linspace(lo, hi, nodes)
            for lo, hi in zip(mu.box.lows, mu.box.highs)]
    mesh = np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1)
    pts = mesh.reshape(-1, mu.ndim)
    facets = []
    for facet in mu.facets:
        on = np.isclose(pts[:, facet.axis], facet.value)
        facets.append({'axis': int(facet.axis),
                       'value': float(facet.value),
                       'points': pts[on].tolist(),
                       'density': mu.facet_density(facet, pts[on]).tolist()})
    return {'box': mu.box.to_dict(),
            'atoms': [{'point': p.tolist(), 'mass': m} for p, m in mu.atoms],
            'interior': {'axes': [a.tolist() for a in axes],
                         'density': mu.interior_density(pts).tolist()},
            'facets': facets,
            'part': mu.part}
