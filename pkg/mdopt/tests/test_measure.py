#!/usr/bin/env python

__author__ = "mdopt developers"

import numpy as np
from numpy.testing import assert_allclose

from mdopt.distributions import (BetaMarginal, ExponentialMarginal,
                                 PowerLawMarginal, ProductDensity,
                                 UniformMarginal)
from mdopt.measure import (build_transformed, measure_to_dict, probability,
                           region_mass, restrict,
                           single_item_marginal_density, total_variation)
from mdopt.quadrature import adaptive_gauss_legendre
from mdopt.regions import BoxRegion, CurveRegion, HalfspaceRegion


def _uniform_square():
    return ProductDensity([UniformMarginal(), UniformMarginal()])


def test_uniform_structure():
    mu = build_transformed(_uniform_square())
    assert mu.has_constant_density
    assert len(mu.atoms) == 1
    assert_allclose(mu.atoms[0][0], [0.0, 0.0])
    assert_allclose(mu.interior_density([0.3, 0.7]), -3.0)
    msg = "Only the upper facets carry mass when the lows are zero"
    assert sorted((f.axis, f.value) for f in mu.facets) == \
        [(0, 1.0), (1, 1.0)], msg
    assert_allclose([f.coef for f in mu.facets], 1.0)


def test_total_mass_vanishes():
    densities = [_uniform_square(),
                 ProductDensity([UniformMarginal(4, 16),
                                 UniformMarginal(4, 7)]),
                 ProductDensity([BetaMarginal(1, 2), BetaMarginal(1, 2)]),
                 ProductDensity([BetaMarginal(2, 3), BetaMarginal(1, 1)]),
                 ProductDensity([ExponentialMarginal(1.0),
                                 ExponentialMarginal(2.0)]),
                 ProductDensity([PowerLawMarginal(6), PowerLawMarginal(7)])]
    for f in densities:
        mu = build_transformed(f)
        msg = f"mu(X) should vanish for {f}"
        assert_allclose(region_mass(mu), 0.0, atol=1e-5, err_msg=msg)


def test_halfspace_mass_and_parts():
    mu = build_transformed(_uniform_square())
    for p in [0.25, 0.5, 1.0]:
        H = HalfspaceRegion([1, 1], p)
        msg = f"mu(x + y <= {p}) = 1 - 3 p^2 / 2"
        assert_allclose(region_mass(mu, H), 1 - 1.5 * p**2, atol=1e-12,
                        err_msg=msg)
        assert_allclose(region_mass(restrict(mu, H)), region_mass(mu, H))

    assert_allclose(region_mass(mu.positive_part()), 3.0, atol=1e-12)
    assert_allclose(region_mass(mu.negative_part()), -3.0, atol=1e-12)
    assert_allclose(total_variation(mu), 6.0, atol=1e-12)


def test_curved_exclusion_region_mass():
    f = ProductDensity([UniformMarginal(4, 16), UniformMarginal(4, 7)])
    mu = build_transformed(f)
    Z = CurveRegion(upper=lambda x: 8.0 - 0.5 * x, kinks=[8.0])
    msg = "The exclusion region below y = 8 - x/2 has zero mass"
    assert_allclose(region_mass(mu, Z), 0.0, atol=1e-8, err_msg=msg)


def test_beta_line_integral():
    mu = build_transformed(ProductDensity([BetaMarginal(1, 2),
                                           BetaMarginal(1, 2)]))
    msg = "The interior density at x = 0 is 16 y - 12"
    ys = np.linspace(0, 1, 5)
    pts = np.column_stack([np.zeros_like(ys), ys])
    assert_allclose(mu.interior_density(pts), 16 * ys - 12, atol=1e-12,
                    err_msg=msg)

    def column(t):
        return mu.interior_density(np.column_stack([np.zeros_like(t), t]))

    msg = "The vertical line integral from y = 1/2 up vanishes at x = 0"
    assert_allclose(adaptive_gauss_legendre(column, 0.5, 1.0), 0.0,
                    atol=1e-12, err_msg=msg)


def test_single_item_and_probability():
    density, atoms = single_item_marginal_density(UniformMarginal())
    assert_allclose(density(np.array([0.2, 0.9])), -2.0)
    assert_allclose([a[1] for a in atoms], [1.0, 1.0])

    f = _uniform_square()
    assert_allclose(probability(f, HalfspaceRegion([1, 1], 1.0)), 0.5)
    g = ProductDensity([BetaMarginal(1, 2), BetaMarginal(1, 2)])
    msg = "Pr[x, y <= 1/2] = 0.75^2 under Beta(1, 2)"
    assert_allclose(probability(g, BoxRegion([0, 0], [0.5, 0.5])),
                    0.5625, atol=1e-10, err_msg=msg)


def test_measure_dump():
    mu = build_transformed(_uniform_square())
    d = measure_to_dict(mu, nodes=5)
    assert d['atoms'] == [{'point': [0.0, 0.0], 'mass': 1.0}]
    assert len(d['interior']['density']) == 25
    assert len(d['facets']) == 2
    msg = "Every facet holds one row of the 5 x 5 lattice"
    assert all(len(fc['points']) == 5 for fc in d['facets']), msg
