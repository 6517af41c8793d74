#!/usr/bin/env python

__author__ = "mdopt developers"

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from mdopt.distributions import (BetaMarginal, Box, ProductDensity,
                                 UniformMarginal)
from mdopt.lattice import (CONVEX, LIPSCHITZ, MONOTONE, ConeSpec,
                           GridFunction, GridMeasure, GridSpec,
                           cone_constraints, deposit_points,
                           discretize_measure, is_in_cone,
                           stencil_directions)
from mdopt.measure import build_transformed, region_mass
from mdopt.regions import HalfspaceRegion
from mdopt.utils import PreconditionError, SchemaError


def _unit_grid(nodes):
    return GridSpec(Box([0, 0], [1, 1]), nodes)


def _uniform_mu():
    return build_transformed(ProductDensity([UniformMarginal(),
                                             UniformMarginal()]))


def test_grid_spec():
    grid = _unit_grid(3)
    assert grid.shape == (3, 3)
    assert grid.size == 9
    assert_allclose(grid.spacing, [0.5, 0.5])
    assert grid.coords().shape == (9, 2)
    assert_allclose(grid.coords()[5], [0.5, 1.0])
    assert grid.refine(2).nodes == (5, 5)
    msg = "Ties in nearest_index go to the lower node"
    assert_array_equal(grid.nearest_index([[0.25, 0.76]]), [[0, 2]],
                       err_msg=msg)
    assert GridSpec.from_dict(grid.to_dict()) == grid
    with pytest.raises(ValueError):
        _unit_grid(1)
    with pytest.raises(SchemaError):
        GridSpec.from_dict({'nodes': [3, 3]})


def test_stencil_directions():
    assert stencil_directions(2, 1) == [(0, 1), (1, -1), (1, 0), (1, 1)]
    dirs = stencil_directions(2, 2)
    msg = "Radius two has eight primitive directions up to sign"
    assert len(dirs) == 8, msg
    assert (2, 2) not in dirs and (1, 2) in dirs and (2, -1) in dirs
    assert len(stencil_directions(3, 1)) == 13


def test_cone_rows():
    grid = _unit_grid(3)
    cs = cone_constraints(grid, ConeSpec.utility(2, radius=1))
    msg = "3 x 3 grid: 12 monotone, 8 convex and 12 Lipschitz rows"
    assert (cs.count(MONOTONE), cs.count(CONVEX), cs.count(LIPSCHITZ)) == \
        (12, 8, 12), msg
    assert cs.nrows == 32
    frame = cs.to_frame()
    assert set(frame['kind']) == {'monotone', 'convex', 'lipschitz'}

    mixed = cone_constraints(grid, ConeSpec((1, 0), radius=1,
                                            lipschitz=True))
    msg = "A zero direction drops monotone rows and mirrors Lipschitz rows"
    assert (mixed.count(MONOTONE), mixed.count(LIPSCHITZ)) == (6, 18), msg

    with pytest.raises(ValueError):
        ConeSpec((2, 1))


def test_is_in_cone():
    grid = _unit_grid(5)
    cone = ConeSpec.utility(2, radius=2)
    ok = GridFunction.from_callable(grid, lambda p: 0.5 * p.sum(axis=1))
    assert is_in_cone(ok, cone).ok

    cases = {'monotone': lambda p: -0.5 * p[:, 0],
             'lipschitz': lambda p: p[:, 0]**2,
             'convex': lambda p: 0.5 * np.sqrt(p[:, 0])}
    for kind, func in cases.items():
        check = is_in_cone(GridFunction.from_callable(grid, func), cone)
        msg = f"Expected a {kind} violation"
        assert not check.ok, msg
        assert kind in {v['kind'] for v in check.violations}, msg
        assert check.worst > 0


def test_grid_measure_plumbing(tmp_path):
    grid = _unit_grid(3)
    m = GridMeasure.point_masses(grid, [[0, 0], [1, 1]], [1.0, -1.0])
    assert_allclose(m.total, 0.0)
    assert_allclose(m.positive().total, 1.0)
    assert_allclose(m.negative().total, 1.0)
    pts, masses = m.restrict_to_support()
    assert_allclose(pts, [[0, 0], [1, 1]])
    assert_allclose(masses, [1.0, -1.0])
    u = GridFunction.from_callable(grid, lambda p: p.sum(axis=1))
    assert_allclose(m.integrate(u), -2.0)
    assert_allclose((2 * m - m).mass, m.mass)

    out = deposit_points(grid, [[0.25, 0.5]], [1.0], scheme='linear')
    assert_allclose(out[0, 1], 0.5)
    assert_allclose(out[1, 1], 0.5)
    assert_allclose(out.sum(), 1.0)

    again = GridMeasure.from_dict(m.to_dict())
    assert_allclose(again.mass, m.mass)

    import h5py
    fname = str(tmp_path / 'measure.h5')
    assert m.write_h5(fname)
    with h5py.File(fname, 'r') as hf:
        assert_allclose(hf['mass'][:], m.mass)
        assert_array_equal(hf.attrs['nodes'], [3, 3])

    fname = str(tmp_path / 'rows.txt')
    cs = cone_constraints(grid, ConeSpec((1, 1), radius=1))
    cs.write_triplets(fname)
    with open(fname, 'r') as f:
        header = f.readline().split()
    assert header == ['row', 'col', 'coeff', 'sense', 'rhs']


def test_discretize_conserves_mass_and_moments():
    mu = _uniform_mu()
    for scheme in ['voronoi', 'linear']:
        m = discretize_measure(mu, _unit_grid(9), scheme=scheme)
        msg = f"Total mass must vanish ({scheme})"
        assert_allclose(m.total, 0.0, atol=1e-12, err_msg=msg)

    m = discretize_measure(mu, _unit_grid(9), scheme='linear')
    coords = m.grid.coords()
    flat = m.flat
    msg = "Linear deposits keep first moments (zero for linear utilities)"
    assert_allclose(coords.T @ flat, [0.0, 0.0], atol=1e-12, err_msg=msg)
    msg = "Bilinear utilities are integrated exactly: E[xy] = 1/4"
    assert_allclose(np.sum(coords[:, 0] * coords[:, 1] * flat), 0.25,
                    atol=1e-12, err_msg=msg)


def test_discretize_restricted_parts():
    mu = _uniform_mu()
    H = HalfspaceRegion([1, 1], 0.5)
    for scheme in ['voronoi', 'linear']:
        m = discretize_measure(mu.restrict(H), _unit_grid(7), scheme=scheme)
        msg = f"Restricted mass 1 - 3/8 ({scheme})"
        assert_allclose(m.total, 0.625, atol=1e-10, err_msg=msg)

    beta = build_transformed(ProductDensity([BetaMarginal(1, 2),
                                             BetaMarginal(1, 2)]))
    grid = GridSpec(beta.box, 7)
    pos = discretize_measure(beta.positive_part(), grid, scheme='linear')
    neg = discretize_measure(beta.negative_part(), grid, scheme='linear')
    assert np.all(pos.mass >= -1e-12)
    assert np.all(neg.mass <= 1e-12)
    assert_allclose(pos.total, region_mass(beta.positive_part()),
                    atol=1e-6)
    assert_allclose(pos.total + neg.total, 0.0, atol=1e-6)

    with pytest.raises(PreconditionError):
        discretize_measure(mu, GridSpec(Box([0, 0], [2, 1]), 3))
