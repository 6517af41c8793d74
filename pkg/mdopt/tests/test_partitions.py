#!/usr/bin/env python

__author__ = "mdopt developers"

import numpy as np
import pytest
from numpy.testing import assert_allclose

from mdopt.distributions import (BetaMarginal, Box, ProductDensity,
                                 UniformMarginal)
from mdopt.instances import load_instance
from mdopt.measure import build_transformed, region_mass
from mdopt.mechanisms.partitions import (ExclusionSet2D,
                                         beta_factorization,
                                         boundary_from_line_integrals,
                                         canonical_partition,
                                         check_well_formed,
                                         exclusion_utility,
                                         exclusion_utility_bruteforce,
                                         find_critical_price,
                                         mechanism_from_partition,
                                         monotone_curve)
from mdopt.regions import HalfspaceRegion
from mdopt.utils import (InvalidExclusionSetError, PreconditionError,
                         RootNotBracketedError, UnsupportedDimensionError)

MV_PRICE = (4.0 - np.sqrt(2.0)) / 3.0


def _mv_partition():
    inst = load_instance('mv')
    mu = inst.measure()
    return inst, mu, canonical_partition(inst.exclusion_set(mu))


def test_mv_canonical_partition():
    inst, mu, cp = _mv_partition()
    assert_allclose(cp.price, MV_PRICE, atol=1e-7)
    x_crit, y_crit = cp.critical_point
    msg = "The top diagonal of Z runs between (P - 2/3, 2/3) and its mirror"
    assert_allclose([x_crit, y_crit], [MV_PRICE - 2.0 / 3] * 2, atol=1e-6,
                    err_msg=msg)
    assert_allclose(region_mass(mu, cp.exclusion), 0.0, atol=1e-7)

    pts = [[0.1, 0.1], [0.1, 0.9], [0.9, 0.1], [0.9, 0.9]]
    assert cp.classify(pts) == ['Z', 'A', 'B', 'W']

    grid = np.linspace(0, 1, 9)
    pts = np.array(np.meshgrid(grid, grid)).reshape(2, -1).T
    msg = "The utility is the l1 distance to Z"
    assert_allclose(exclusion_utility(cp, pts),
                    exclusion_utility_bruteforce(cp.exclusion, pts),
                    atol=2e-3, err_msg=msg)

    mech = mechanism_from_partition(cp)
    probs, prices = mech.allocation([[0.1, 0.9], [0.9, 0.9], [0.1, 0.1]])
    assert_allclose(probs, [[0, 1], [1, 1], [0, 0]], atol=1e-9)
    assert_allclose(prices, [2.0 / 3, MV_PRICE, 0.0], atol=1e-7)
    assert_allclose(mech.revenue(inst.density), 0.549201, atol=1e-4)


def test_mv_well_formed():
    inst, mu, cp = _mv_partition()
    report = check_well_formed(cp, mu, grid=inst.grid(),
                               density=inst.density)
    assert report.passed, report.failed()
    assert set(report.conditions) == {'exclusion', 'bundle', 'strips_A',
                                      'strips_B'}
    assert_allclose(report.info['critical_price'], MV_PRICE, atol=1e-7)


def test_lottery_partition():
    inst = load_instance('uniform-4-16-4-7')
    mu = inst.measure()
    cp = canonical_partition(inst.exclusion_set(mu))
    assert_allclose(cp.price, 12.0, atol=1e-9)
    assert_allclose(cp.critical_point, [8.0, 4.0], atol=1e-9)
    msg = "Types left of x = 8 buy the lottery, the rest the bundle"
    assert cp.classify([[5.0, 4.5], [6.0, 6.5], [12.0, 5.0]]) == \
        ['Z', 'A', 'W'], msg

    mech = mechanism_from_partition(cp)
    probs, prices = mech.allocation([[6.0, 6.5], [12.0, 5.0]])
    assert_allclose(probs, [[0.5, 1.0], [1.0, 1.0]], atol=1e-9)
    assert_allclose(prices, [8.0, 12.0], atol=1e-9)
    assert_allclose(mech.revenue(inst.density), 88.0 / 9, atol=1e-4)


def test_boundary_item():
    box = Box([0, 0], [7, 14])
    Z = ExclusionSet2D(box, right=lambda y: 1.0 - 0.5 * y,
                       right_prime=lambda y: np.full(np.shape(y), -0.5),
                       price=1.2)
    mech = mechanism_from_partition(canonical_partition(Z))
    item = mech.boundary_item('B', 0.0)
    msg = "Types on 2x + y = 2 buy (1, 1/2) at 1"
    assert_allclose(item.p, [1.0, 0.5], err_msg=msg)
    assert_allclose(item.t, 1.0, err_msg=msg)

    with pytest.raises(PreconditionError):
        mech.boundary_item('A', 0.0)
    with pytest.raises(ValueError):
        mech.boundary_item('C', 0.0)


def test_invalid_exclusion_sets():
    box = Box([0, 0], [1, 1])

    def steep(x):
        return np.where(x < 0.2, 0.9 - 2.0 * x, 0.5)

    cp = canonical_partition(ExclusionSet2D(box, top=steep))
    with pytest.raises(InvalidExclusionSetError, match="outside"):
        mechanism_from_partition(cp)

    with pytest.raises(PreconditionError):
        canonical_partition(ExclusionSet2D(box, price=0.0))
    with pytest.raises(UnsupportedDimensionError):
        ExclusionSet2D(Box([0, 0, 0], [1, 1, 1]), price=1.0)

    with pytest.raises(PreconditionError):
        monotone_curve([0.0], [1.0])
    with pytest.raises(PreconditionError):
        monotone_curve([0.0, 1.0], [1.0, 0.5, 0.2])
    curve, prime = monotone_curve([0, 1, 2], [2, 1, 0])
    assert_allclose(curve(0.5), 1.5)
    assert_allclose(prime(1.5), -1.0)


def test_exclusion_set_from_samples():
    box = Box([0, 0], [1, 1])
    flat = ([0.0, 0.5, 1.0], [2.0 / 3] * 3)
    z = ExclusionSet2D.from_samples(box, top_samples=flat,
                                    right_samples=flat, price=MV_PRICE)
    msg = "Constant samples give the same set as constant curves"
    assert_allclose(z.critical_point, [MV_PRICE - 2.0 / 3] * 2, atol=1e-9,
                    err_msg=msg)
    mu = build_transformed(ProductDensity([UniformMarginal(),
                                           UniformMarginal()]))
    assert_allclose(region_mass(mu, z), 0.0, atol=1e-6)
    with pytest.raises(PreconditionError):
        ExclusionSet2D.from_samples(box, top_samples=([0.5], [0.5]))


def test_critical_price_search():
    mu = build_transformed(ProductDensity([UniformMarginal(),
                                           UniformMarginal()]))
    price = find_critical_price(mu, lambda p: HalfspaceRegion([1, 1], p))
    msg = "mu(x + y <= p) = 1 - 3 p^2 / 2 vanishes at sqrt(2/3)"
    assert_allclose(price, np.sqrt(2.0 / 3), atol=1e-8, err_msg=msg)
    with pytest.raises(RootNotBracketedError):
        find_critical_price(mu, lambda p: HalfspaceRegion([1, 1], p),
                            bracket=(0.0, 0.5))


def test_beta_boundary_and_factorization():
    f = ProductDensity([BetaMarginal(1, 2), BetaMarginal(1, 2)])
    mu = build_transformed(f)
    xs, ys = boundary_from_line_integrals(mu, 'vertical', abscissae=[0.0])
    msg = "The outward integral of 16 y - 12 from y vanishes at 1/2"
    assert_allclose(xs, [0.0])
    assert_allclose(ys, [0.5], atol=1e-8, err_msg=msg)

    alpha, beta, eta = beta_factorization(f)
    rng = np.random.default_rng(3)
    pts = rng.uniform(0.05, 0.95, size=(50, 2))
    got = alpha(pts[:, 0]) * beta(pts[:, 1]) * eta(pts)
    msg = "The factorization reproduces the interior density"
    assert_allclose(got, mu.interior_density(pts), atol=1e-10, err_msg=msg)

    with pytest.raises(PreconditionError):
        beta_factorization(ProductDensity([UniformMarginal(),
                                           UniformMarginal()]))
    with pytest.raises(ValueError):
        boundary_from_line_integrals(mu, 'diagonal')
