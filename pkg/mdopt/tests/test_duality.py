#!/usr/bin/env python

__author__ = "mdopt developers"

import numpy as np
import pytest
from numpy.testing import assert_allclose

from mdopt.distributions import Box, ProductDensity, UniformMarginal
from mdopt.duality import (DualCertificate, duality_gap, extract_dual,
                           feasible_certificate, solve_primal,
                           verify_certificate)
from mdopt.lattice import (ConeSpec, GridFunction, GridSpec,
                           discretize_measure)
from mdopt.measure import build_transformed
from mdopt.utils import PreconditionError


def _uniform_measure(ndim, nodes):
    f = ProductDensity([UniformMarginal()] * ndim)
    grid = GridSpec(Box([0] * ndim, [1] * ndim), nodes)
    return discretize_measure(build_transformed(f), grid, scheme='linear')


def test_single_item_posted_price():
    m = _uniform_measure(1, 21)
    sol = solve_primal(m)
    msg = "Posting 1/2 to a uniform [0, 1] buyer earns 1/4"
    assert_allclose(sol.value, 0.25, atol=1e-6, err_msg=msg)
    x = m.grid.coords()[:, 0]
    assert_allclose(sol.u.flat, np.maximum(x - 0.5, 0.0), atol=1e-6,
                    err_msg="The optimal utility is (x - 1/2)_+")

    cert = extract_dual(sol, m)
    report = verify_certificate(sol.u, cert, m)
    assert report.passed, report.conditions
    assert_allclose(report.gap, 0.0, atol=1e-6)
    assert_allclose(report.dual_value, cert.value)


def test_two_item_strong_and_weak_duality():
    m = _uniform_measure(2, 5)
    sol = solve_primal(m, radius=1)
    assert sol.status == 'optimal'
    cert = extract_dual(sol, m)
    msg = "LP multipliers close the duality gap"
    assert_allclose(cert.value, sol.value, atol=1e-6, err_msg=msg)

    g1, g2 = cert.gamma_marginals()
    assert_allclose((g1 - g2).flat, m.flat + cert.alpha.flat, atol=1e-8)

    naive = feasible_certificate(m)
    msg = "Any feasible transport bounds the revenue from above"
    assert naive.value >= sol.value - 1e-9, msg
    assert duality_gap(sol.value, naive.value) >= -1e-9
    report = verify_certificate(sol.u, naive, m, radius=1)
    assert report.conditions['b_certificate_feasible']['passed']


def test_feasible_certificate_moves():
    m = _uniform_measure(2, 3)
    cert = feasible_certificate(m, transfers=[((0, 0), (1, 1), 0.1)],
                                spreads=[((1, 1), (1, 0), 0.05)])
    assert_allclose(cert.alpha.total, 0.0, atol=1e-14)
    assert_allclose(cert.alpha.mass[1, 1], 0.0, atol=1e-14)
    assert_allclose(cert.alpha.mass[0, 0], -0.1)
    g1, g2 = cert.gamma_marginals()
    assert_allclose((g1 - g2).flat, (m + cert.alpha).flat, atol=1e-12)

    with pytest.raises(PreconditionError):
        feasible_certificate(m, transfers=[((1, 1), (0, 1), 0.1)])
    with pytest.raises(PreconditionError):
        feasible_certificate(m, spreads=[((1, 1), (0, 1), -0.1)])


def test_certificate_json_and_frame(tmp_path):
    m = _uniform_measure(1, 11)
    sol = solve_primal(m, method='highs')
    cert = extract_dual(sol, m)
    again = DualCertificate.from_dict(cert.to_dict())
    assert_allclose(again.value, cert.value)
    assert_allclose(again.alpha.mass, cert.alpha.mass)

    frame = cert.to_frame()
    assert list(frame.columns) == ['x0', 'y0', 'mass']
    msg = "Transport runs from higher to lower types"
    assert np.all(frame['x0'] > frame['y0']), msg

    fname = str(tmp_path / 'cert.h5')
    assert cert.write_h5(fname)

    u = GridFunction.from_dict(sol.u.to_dict())
    assert verify_certificate(u, again, m).passed


def test_wrong_cone_is_rejected():
    m = _uniform_measure(2, 3)
    with pytest.raises(PreconditionError):
        solve_primal(m, cone=ConeSpec((1, 0), radius=1, lipschitz=True))
    with pytest.raises(PreconditionError):
        solve_primal(m, cone=ConeSpec((1, 1), radius=1))
