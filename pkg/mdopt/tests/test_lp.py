#!/usr/bin/env python

__author__ = "mdopt developers"

import numpy as np
import pytest
import scipy.sparse as sp
from numpy.testing import assert_allclose

from mdopt.lp import solve_lp
from mdopt.utils import SolverError

BACKENDS = ['simplex', 'highs']


@pytest.mark.parametrize('method', BACKENDS)
def test_textbook_lp_and_duals(method):
    c = [-1.0, -1.0]
    A = [[1.0, 2.0], [3.0, 1.0]]
    b = [4.0, 6.0]
    res = solve_lp(c, A_ub=A, b_ub=b, method=method)
    assert res.backend == method
    assert res.status == 'optimal'
    assert_allclose(res.x, [1.6, 1.2], atol=1e-9)
    assert_allclose(res.fun, -2.8, atol=1e-12)
    msg = "Duals are d(objective)/d(rhs) of the minimisation"
    assert_allclose(res.ineq_duals, [-0.4, -0.2], atol=1e-9, err_msg=msg)

    res = solve_lp(c, A_ub=sp.csr_matrix(A), b_ub=b, method=method)
    assert_allclose(res.fun, -2.8, atol=1e-12)


@pytest.mark.parametrize('method', BACKENDS)
def test_equalities_and_bounds(method):
    res = solve_lp([2.0, 1.0], A_eq=[[1.0, 1.0]], b_eq=[1.0],
                   method=method)
    assert_allclose(res.x, [0.0, 1.0], atol=1e-12)
    assert_allclose(res.eq_duals, [1.0], atol=1e-9)

    res = solve_lp([-1.0], bounds=[(-1.0, 2.0)], A_ub=[[0.0]], b_ub=[0.0],
                   method=method)
    assert_allclose(res.x, [2.0], atol=1e-12)

    msg = "A free variable pushed against -x <= 3"
    res = solve_lp([1.0], A_ub=[[-1.0]], b_ub=[3.0], bounds=[(None, None)],
                   method=method)
    assert_allclose(res.x, [-3.0], atol=1e-12, err_msg=msg)
    assert_allclose(res.ineq_duals, [-1.0], atol=1e-9, err_msg=msg)


@pytest.mark.parametrize('method', BACKENDS)
def test_failures_raise(method):
    with pytest.raises(SolverError):
        solve_lp([1.0], A_ub=[[1.0]], b_ub=[-1.0], method=method)
    with pytest.raises(SolverError):
        solve_lp([-1.0, 0.0], A_ub=[[0.0, 1.0]], b_ub=[1.0], method=method)


def test_backends_agree_on_random_programs():
    rng = np.random.default_rng(0)
    for _ in range(20):
        m, n = rng.integers(2, 6), rng.integers(2, 7)
        A = rng.uniform(-1, 1, size=(m, n))
        b = rng.uniform(0.1, 2.0, size=m)
        c = rng.uniform(-1, 1, size=n)
        first = solve_lp(c, A_ub=A, b_ub=b, bounds=(0.0, 1.0),
                         method='simplex')
        second = solve_lp(c, A_ub=A, b_ub=b, bounds=(0.0, 1.0),
                          method='highs')
        msg = "The dense simplex and HiGHS disagree on the optimum"
        assert_allclose(first.fun, second.fun, atol=1e-9, err_msg=msg)

    with pytest.raises(ValueError):
        solve_lp([1.0], method='interior-point')
