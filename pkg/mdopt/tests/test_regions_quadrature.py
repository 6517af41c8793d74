#!/usr/bin/env python

__author__ = "mdopt developers"

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from mdopt.quadrature import (QuadratureConfig, adaptive_gauss_legendre,
                              fixed_gauss_legendre, integrate_interval,
                              integrate_region)
from mdopt.regions import (BaseUnionRegion, BoxRegion, ComplementRegion,
                           CurveRegion, GridMaskRegion, HalfspaceRegion,
                           IntervalSetRegion, polynomial_box_integral,
                           polynomial_halfspace_integral)
from mdopt.utils import AccuracyError


def _ones(pts):
    return np.ones(pts.shape[0])


def test_polynomial_integrals():
    lows, highs = np.zeros(2), np.ones(2)
    assert_allclose(polynomial_box_integral(lows, highs, [[0, 1], [0, 1]]),
                    0.25)
    area = [(1.0, 0.5), (1.5, 0.875), (0.0, 0.0), (2.0, 1.0)]
    for offset, expected in area:
        got = polynomial_halfspace_integral(lows, highs, [1, 1], offset,
                                            [[1, 0], [1, 0]])
        msg = f"Area of the unit square below x + y = {offset}"
        assert_allclose(got, expected, atol=1e-14, err_msg=msg)

    msg = "First moment of the lower-left triangle"
    got = polynomial_halfspace_integral(lows, highs, [1, 1], 1.0,
                                        [[0, 1], [1, 0]])
    assert_allclose(got, 1.0 / 6, err_msg=msg)

    msg = "A negative weight reflects the axis"
    got = polynomial_halfspace_integral(lows, highs, [-1, 1], 0.0,
                                        [[1, 0], [1, 0]])
    assert_allclose(got, 0.5, err_msg=msg)

    msg = "Unit simplex volume in three dimensions"
    got = polynomial_halfspace_integral(np.zeros(3), np.ones(3),
                                        [1, 1, 1], 1.0, [[1, 0]] * 3)
    assert_allclose(got, 1.0 / 6, err_msg=msg)


def test_region_membership_and_sections():
    H = HalfspaceRegion([1, 1], 1.0)
    pts = np.array([[0.2, 0.3], [0.6, 0.6], [0.5, 0.5]])
    assert_array_equal(H.contains(pts), [True, False, True])
    assert_array_equal((~H).contains(pts), [False, True, False])
    strict = HalfspaceRegion([1, 1], 1.0, strict=True)
    assert not strict.contains([0.5, 0.5])[0]

    both = H & BoxRegion([0, 0], [0.4, 1])
    assert_array_equal(both.contains(pts), [True, False, False])
    either = H | BoxRegion([0.55, 0.55], [1, 1])
    assert_array_equal(either.contains(pts), [True, True, True])

    section = H.section(0, 0.25)
    assert_allclose(section.intervals(0, 1), [(0.0, 0.75)])
    assert IntervalSetRegion([(0, 1), (0.5, 2)]).intervals(0, 3) == \
        [(0.0, 2.0)]

    mask = np.array([[True, False], [False, False]])
    G = GridMaskRegion([0, 0], [1, 1], mask)
    assert_array_equal(G.contains([[0.4, 0.4], [0.6, 0.1], [-0.6, 0]]),
                       [True, False, False])

    U = BaseUnionRegion([[0.5, 0.0], [0.0, 0.5]])
    assert_array_equal(U.contains([[0.6, 0.1], [0.1, 0.6], [0.4, 0.4]]),
                       [True, True, False])
    assert_allclose(U.section(0, 0.2).intervals(0, 1), [(0.5, 1.0)])


def test_one_dimensional_quadrature():
    got = adaptive_gauss_legendre(np.sqrt, 0.0, 1.0)
    assert_allclose(got, 2.0 / 3, atol=1e-9)

    got = integrate_interval(lambda t: np.abs(t - 1.0 / 3), 0.0, 1.0,
                             breakpoints=[1.0 / 3])
    assert_allclose(got, 5.0 / 18, atol=1e-12)

    edges = np.linspace(0, 1, 5)
    assert_allclose(fixed_gauss_legendre(lambda t: t**5, edges), 1.0 / 6)

    vec = adaptive_gauss_legendre(lambda t: np.column_stack([t, t**2]),
                                  0.0, 2.0)
    assert_allclose(vec, [2.0, 8.0 / 3])

    config = QuadratureConfig(tol=1e-14, max_depth=1, abort_tol=1e-14)
    with pytest.raises(AccuracyError):
        adaptive_gauss_legendre(lambda t: (t > 1.0 / 3).astype(float),
                                0.0, 1.0, config=config)


def test_region_quadrature():
    lows, highs = np.zeros(2), np.ones(2)
    below = CurveRegion(upper=lambda x: 1.0 - x**2)
    msg = "Area under 1 - x^2 on [0, 1]"
    assert_allclose(integrate_region(_ones, below, lows, highs), 2.0 / 3,
                    atol=1e-9, err_msg=msg)

    H = HalfspaceRegion([1, 1], 1.2)
    C = ComplementRegion(H)
    exact = H.integrate_polynomial(lows, highs, [[0, 1], [1, 0]])
    got = integrate_region(lambda p: p[:, 0], H, lows, highs)
    assert_allclose(got, exact, atol=1e-9)
    total = got + integrate_region(lambda p: p[:, 0], C, lows, highs)
    assert_allclose(total, 0.5, atol=1e-9)

    vec = integrate_region(lambda p: np.column_stack([np.ones(len(p)),
                                                      p[:, 0]]),
                           BoxRegion(lows, highs), lows, highs, size=2)
    assert_allclose(vec, [1.0, 0.5], atol=1e-12)

    simplex = HalfspaceRegion(np.ones(3), 1.0)
    got = integrate_region(_ones, simplex, np.zeros(3), np.ones(3))
    assert_allclose(got, 1.0 / 6, atol=1e-8)
