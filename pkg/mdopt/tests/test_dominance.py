#!/usr/bin/env python

__author__ = "mdopt developers"

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from mdopt.distributions import Box, ProductDensity, UniformMarginal
from mdopt.dominance import (DOMINATES, FAILS, BaseUnion, bases_union_mass,
                             check_regionthm, convex_dominates, corners,
                             enumerate_increasing_sets,
                             first_order_dominates, first_order_oracle,
                             increasing_set_witness, second_order_dominates,
                             strassen_coupling)
from mdopt.lattice import GridFunction, GridMeasure, GridSpec
from mdopt.measure import build_transformed
from mdopt.regions import HalfspaceRegion
from mdopt.utils import PreconditionError


def _grid(nodes):
    return GridSpec(Box([0, 0], [1, 1]), nodes)


def _move_up(b, rng):
    """Sends every node's mass to a random node above it"""
    shape = b.grid.shape
    out = np.zeros(shape)
    for idx in np.ndindex(*shape):
        dest = tuple(rng.integers(i, k) for i, k in zip(idx, shape))
        out[dest] += b.mass[idx]
    return GridMeasure(b.grid, out)


def test_first_order_point_masses():
    grid = _grid(2)
    high = GridMeasure.point_masses(grid, [[1, 1]], [1.0])
    low = GridMeasure.point_masses(grid, [[0, 0]], [1.0])

    res = first_order_dominates(high, low)
    assert res.verdict == DOMINATES
    sources, sinks, masses = res.witness
    assert_allclose(masses.sum(), 1.0)
    coords = grid.coords()
    msg = "Every coupling pair moves mass to a componentwise lower node"
    assert np.all(coords[sources] >= coords[sinks]), msg

    res = first_order_dominates(low, high)
    assert res.verdict == FAILS
    assert res.condition == 'increasing-set'
    assert res.witness[1, 1] and not res.witness[0, 0]
    assert_allclose(res.details['gap'], 1.0)

    assert first_order_dominates(low, low).dominates
    assert convex_dominates(low, low).dominates
    mask, gap = increasing_set_witness(high, low)
    assert mask is None


@pytest.mark.parametrize('shape', [(2, 2), (2, 3), (3, 3), (4, 4), (3, 5),
                                   (5, 5)])
def test_first_order_lp_agrees_with_oracle(shape):
    rng = np.random.default_rng(sum(shape) * 100 + shape[0])
    grid = _grid(list(shape))
    dominating = 0
    for trial in range(200):
        b = GridMeasure(grid, rng.random(shape))
        if trial % 2:
            a = _move_up(b, rng)
        else:
            a = GridMeasure(grid, rng.random(shape))
            a = a * (b.total / a.total)
        lp = first_order_dominates(a, b).dominates
        oracle, worst = first_order_oracle(a, b)
        msg = f"Trial {trial}: flow program says {lp}, oracle says {oracle}"
        assert lp == oracle, msg
        if trial % 2:
            assert lp, f"Trial {trial}: upward moves must dominate"
        if not oracle:
            assert worst is not None
            continue
        dominating += 1
        msg = f"Trial {trial}: first order implies the increasing convex "\
              f"order"
        assert convex_dominates(a, b, v=(1, 1)).dominates, msg
        if trial < 8 and trial % 2:
            coupling = strassen_coupling(a, b)
            assert coupling.dominates
            assert_allclose(coupling.witness[2].sum(), b.total, rtol=1e-8)
    assert dominating >= 100


def test_increasing_sets_and_corners():
    msg = "A 5 x 5 lattice has C(10, 5) increasing node sets"
    assert len(enumerate_increasing_sets((5, 5))) == 252, msg
    assert len(enumerate_increasing_sets((3, 3))) == 20
    assert len(enumerate_increasing_sets((4, ))) == 5

    i, j = np.indices((3, 3))
    mask = (i >= 1) | (j >= 2)
    assert_array_equal(corners(mask), [[0, 2], [1, 0]])

    union = BaseUnion([[0.5, 0.0], [0.5, 0.5], [0.5, 0.0]]).canonical()
    assert_allclose(union.roots, [[0.5, 0.0]])
    assert_array_equal(union.contains([[0.6, 0.1], [0.4, 0.9]]),
                       [True, False])


def test_bases_union_mass():
    grid = _grid(3)
    m = GridMeasure(grid, np.arange(9.0).reshape(3, 3))
    union = BaseUnion([[0.5, 1.0], [1.0, 0.5]])
    msg = "Nodes (1, 2), (2, 1) and (2, 2) lie in the union"
    assert_allclose(bases_union_mass(m, union), 5.0 + 7.0 + 8.0,
                    err_msg=msg)
    assert bases_union_mass(m, BaseUnion([], ndim=2)) == 0.0

    mu = build_transformed(ProductDensity([UniformMarginal(),
                                           UniformMarginal()]))
    msg = "Interior -3 / 4 plus a half unit on each upper facet"
    assert_allclose(bases_union_mass(mu, BaseUnion([[0.5, 0.5]])), 0.25,
                    atol=1e-9, err_msg=msg)


def test_convex_and_second_order():
    grid = _grid(3)
    centre = GridMeasure.point_masses(grid, [[0.5, 0.5]], [1.0])
    spread = GridMeasure.point_masses(grid, [[0.0, 0.5], [1.0, 0.5]],
                                      [0.5, 0.5])

    msg = "A mean-preserving spread dominates in the convex order"
    assert convex_dominates(spread, centre, v=(0, 0)).dominates, msg
    assert convex_dominates(spread, centre).dominates, msg

    res = convex_dominates(centre, spread, radius=1)
    assert res.verdict == FAILS
    assert isinstance(res.witness, GridFunction)
    msg = "The witness separates the two measures"
    assert_allclose((centre - spread).integrate(res.witness), res.value,
                    atol=1e-9, err_msg=msg)
    assert res.value < 0

    assert second_order_dominates(centre, spread).dominates
    assert not second_order_dominates(spread, centre).dominates

    high = GridMeasure.point_masses(grid, [[1, 1]], [1.0])
    assert convex_dominates(high, centre).dominates
    assert not convex_dominates(high, centre, v=(-1, -1)).dominates


def test_dominance_preconditions():
    grid = _grid(3)
    one = GridMeasure.point_masses(grid, [[0, 0]], [1.0])
    two = GridMeasure.point_masses(grid, [[1, 1]], [2.0])
    with pytest.raises(PreconditionError):
        convex_dominates(two, one)
    with pytest.raises(PreconditionError):
        first_order_dominates(two, one)

    other = GridMeasure.point_masses(_grid(4), [[0, 0]], [1.0])
    with pytest.raises(PreconditionError):
        first_order_dominates(other, one)

    signed = GridMeasure.point_masses(grid, [[0, 0], [1, 1]], [2.0, -1.0])
    with pytest.raises(PreconditionError):
        first_order_dominates(signed, one)


def test_density_region_check():
    lows, highs = [0, 0], [1, 1]
    empty = HalfspaceRegion([1, 1], -1.0)

    def flat(p):
        return np.ones(p.shape[0])

    def product(p):
        return 4.0 * p[:, 0] * p[:, 1]

    def ones(t):
        return np.ones_like(t)

    factor = (ones, ones, lambda p: product(p) - 1.0)
    res = check_regionthm(product, flat, lows, highs, empty,
                          factorization=factor)
    msg = "4xy first-order dominates the uniform density"
    assert res.dominates, msg
    assert res.details['factorization_residual'] <= 1e-8

    res = check_regionthm(product, flat, lows, highs, empty)
    assert res.condition == 'factorization' and not res.dominates

    decreasing = (ones, ones, lambda p: 1.0 - product(p))
    res = check_regionthm(flat, product, lows, highs, empty,
                          factorization=decreasing)
    assert not res.dominates

    res = check_regionthm(flat, flat, lows, highs, empty)
    assert res.dominates and res.details['identical']

    with pytest.raises(PreconditionError):
        check_regionthm(flat, flat, lows, highs,
                        HalfspaceRegion([1, 1], 0.5))
    with pytest.raises(PreconditionError):
        check_regionthm(lambda p: 2.0 * flat(p), flat, lows, highs, empty)
