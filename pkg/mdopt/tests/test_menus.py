#!/usr/bin/env python

__author__ = "mdopt developers"

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from mdopt.distributions import (Box, ExponentialMarginal, ProductDensity,
                                 UniformMarginal)
from mdopt.instances import load_instance
from mdopt.lattice import GridFunction, GridSpec
from mdopt.mechanisms.hypercube import HypercubeInstance
from mdopt.mechanisms.menus import (Menu, MenuItem, check_grand_bundling,
                                    check_optimal_menu, dominance_direction,
                                    essential_form, menu_from_utility,
                                    menu_regions, menu_revenue,
                                    menu_utility, myerson_price,
                                    single_item_revenue)
from mdopt.utils import PreconditionError, SchemaError

MV_PRICE = (4.0 - np.sqrt(2.0)) / 3.0


def _mv_menu(bundle=MV_PRICE):
    return Menu([((1, 0), 2.0 / 3), ((0, 1), 2.0 / 3), ((1, 1), bundle)])


def _uniform_square():
    return ProductDensity([UniformMarginal(), UniformMarginal()])


def test_menu_basics():
    menu = _mv_menu()
    assert len(menu) == 3
    assert_allclose(menu.allocations[0], [0, 0])
    assert_allclose(menu.prices, [0, 2.0 / 3, 2.0 / 3, MV_PRICE])
    assert Menu.from_dict(menu.to_dict(), ndim=2).items == menu.items

    choice = menu_utility(menu, [0.9, 0.1])
    assert choice.index == 1 and not choice.tie
    assert_allclose(choice.value, 0.9 - 2.0 / 3)
    msg = "Ties go to the lower option index"
    choice = menu_utility(menu, [2.0 / 3, 0.0])
    assert choice.index == 0 and choice.tie, msg

    with pytest.raises(ValueError):
        MenuItem((1.5, 0), 1.0)
    with pytest.raises(ValueError):
        Menu([((1, 0), 1.0), ((1, 0, 0), 1.0)])
    with pytest.raises(SchemaError):
        Menu.from_dict({'items': [{'p': [2, 0], 't': 1}]})

    assert dominance_direction((0, 0.5, 1)) == (1, 0, -1)


def test_menu_regions():
    grid = GridSpec(Box([0, 0], [1, 1]), 4)
    part = menu_regions(_mv_menu(), grid)
    assert part.labels[0, 0] == 0
    assert part.labels[3, 3] == 3
    assert part.labels[3, 0] == 1 and part.labels[0, 3] == 2
    assert part.counts().sum() == 16
    msg = "The region of option 3 contains the top corner"
    assert part.region(3).contains([[1.0, 1.0]])[0], msg
    assert not part.region(3).contains([[0.1, 0.1]])[0]


def test_menu_revenue_closed_forms():
    msg = "Two uniform items: singles at 2/3 and the bundle at "\
          "(4 - sqrt 2)/3"
    assert_allclose(menu_revenue(_mv_menu(), _uniform_square()), 0.549201,
                    atol=1e-6, err_msg=msg)

    f = ProductDensity([UniformMarginal(4, 16), UniformMarginal(4, 7)])
    menu = Menu([((0.5, 1), 8.0), ((1, 1), 12.0)])
    msg = "The lottery (1/2, 1) at 8 and the bundle at 12 earn 88/9"
    assert_allclose(menu_revenue(menu, f), 88.0 / 9, atol=1e-6, err_msg=msg)


def test_essential_form():
    menu = Menu([((1, 0), 2.0 / 3), ((1, 0), 2.0 / 3), ((0, 1), 2.0 / 3),
                 ((1, 1), MV_PRICE), ((1, 1), 5.0)])
    reduced = essential_form(menu, _uniform_square())
    msg = "Duplicates and the never-chosen bundle at 5 are dropped"
    assert reduced.items == _mv_menu().items, msg


def test_optimal_menu_conditions():
    inst = load_instance('mv')
    mu = inst.measure()
    report = check_optimal_menu(inst.menu, mu, inst.grid(),
                                refine=inst.refine)
    assert report.passed, report.failed()
    assert sorted(report.conditions) == ['option_0', 'option_1',
                                         'option_2', 'option_3']
    assert_allclose(report.conditions['option_0']['region_mass'], 0.0,
                    atol=1e-9)

    report = check_optimal_menu(_mv_menu(bundle=0.7), mu, inst.grid(),
                                refine=1)
    msg = "A bundle priced off the critical price unbalances the regions"
    assert not report.passed, msg
    assert 'mass-balance' in {c['condition']
                              for c in report.conditions.values()}


def test_grand_bundling():
    inst = load_instance('hypercube-2-1')
    mu = inst.measure()
    price = inst.resolved_bundle_price(mu)
    assert_allclose(price, 0.387426, atol=1e-5)
    report = check_grand_bundling(price, mu, inst.grid())
    assert report.passed, report.failed()
    assert_allclose(report.conditions['exclusion']['region_mass'], 0.0,
                    atol=1e-6)

    inst = load_instance('hypercube-3-0')
    mu = inst.measure()
    report = check_grand_bundling(1.0, mu, inst.grid())
    msg = "Three uniform [0, 1] items are not sold as a bundle at 1"
    assert not report.passed, msg

    with pytest.raises(PreconditionError):
        check_grand_bundling(0.0, mu, inst.grid())
    with pytest.raises(PreconditionError):
        check_grand_bundling(3.0, mu, inst.grid())


@pytest.mark.parametrize('nodes', [9, 21])
def test_grand_bundling_fails_below_threshold(nodes):
    inst = HypercubeInstance(2, 0.0)
    mu = inst.measure()
    price = inst.critical_price()
    assert_allclose(price, np.sqrt(2.0 / 3), atol=1e-8)
    report = check_grand_bundling(price, mu, GridSpec(mu.box, nodes))

    msg = "The critical price balances both regions"
    for name in ('exclusion', 'bundle'):
        assert report.conditions[name]['condition'] != 'mass-balance', \
            msg
    assert report.conditions['exclusion']['passed']
    msg = "Two uniform [0, 1] items lie below the bundling threshold"
    assert report.failed() == ['bundle'], msg
    bundle = report.conditions['bundle']
    assert bundle['condition'] == 'test-function'
    assert bundle['value'] < -0.05, bundle


def test_single_item_pricing():
    assert_allclose(myerson_price(UniformMarginal()), 0.5, atol=1e-10)
    assert_allclose(single_item_revenue(UniformMarginal(), 0.5), 0.25)
    assert_allclose(myerson_price(UniformMarginal(4, 16)), 8.0, atol=1e-10)
    msg = "The exponential virtual value vanishes at 1/lam"
    assert_allclose(myerson_price(ExponentialMarginal(2.0)), 0.5, atol=1e-5,
                    err_msg=msg)


def test_menu_from_utility():
    grid = GridSpec(Box([0, 0], [1, 1]), 11)
    u = GridFunction.from_callable(
        grid, lambda p: np.maximum(p - 0.5, 0.0).sum(axis=1))
    menu, shares = menu_from_utility(u)
    assert_array_equal(menu.allocations[1:], [[0, 1], [1, 0], [1, 1]])
    assert_allclose(menu.prices[1:], [0.5, 0.5, 1.0], atol=1e-12)
    assert_allclose(shares, [30.0 / 121, 30.0 / 121, 36.0 / 121])

    msg = "Singles at 1/2 and the bundle at 1 earn 1/2"
    assert_allclose(menu_revenue(menu, _uniform_square()), 0.5, atol=1e-9,
                    err_msg=msg)
