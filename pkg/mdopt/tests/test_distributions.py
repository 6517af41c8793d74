#!/usr/bin/env python

__author__ = "mdopt developers"

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from mdopt.distributions import (BetaMarginal, Box, ExponentialMarginal,
                                 PowerLawMarginal, ProductDensity,
                                 UniformMarginal, density_from_dict,
                                 eval_density, eval_gradient,
                                 marginal_from_dict, virtual_value)
from mdopt.utils import DomainError, SchemaError, SingularityError


def test_box_validation():
    box = Box([4, 4], [16, 7])
    assert_allclose(box.widths, [12, 3])
    assert_allclose(box.volume, 36.0)
    assert_array_equal(box.contains([[4, 4], [16, 7], [3.9, 5]]),
                       [True, True, False])
    with pytest.raises(ValueError):
        Box([-1, 0], [1, 1])
    with pytest.raises(ValueError):
        Box([0, 1], [1, 1])
    with pytest.raises(SchemaError):
        Box.from_dict({'lows': [0, 0]})


def test_uniform_marginal():
    m = UniformMarginal(4, 16)
    z = np.array([4.0, 10.0, 16.0])
    assert_allclose(m.pdf(z), 1.0 / 12)
    assert_allclose(m.cdf(z), [0.0, 0.5, 1.0])
    assert_allclose(m.dpdf(z), 0.0)
    msg = "The uniform [0, 1] virtual value is 2z - 1"
    assert_allclose(virtual_value(UniformMarginal(), 0.25), -0.5,
                    err_msg=msg)
    with pytest.raises(DomainError):
        m.pdf(3.0)


def test_beta_marginal():
    m = BetaMarginal(1, 2)
    z = np.linspace(0, 1, 11)
    assert_allclose(m.pdf(z), 2 * (1 - z), atol=1e-14)
    assert_allclose(m.dpdf(z), -2.0, atol=1e-14)
    assert_allclose(m.x_dpdf(z), -2 * z, atol=1e-14)
    assert_allclose(m.cdf(0.5), 0.75)
    with pytest.raises(SingularityError):
        m.virtual_value(1.0)
    with pytest.raises(ValueError):
        BetaMarginal(0.5, 2)


def test_truncation_defaults():
    for lam in [1.0, 2.0]:
        m = ExponentialMarginal(lam)
        assert_allclose(m.high, 14.0 / lam)
        msg = f"Exponential({lam}) tail mass {m.truncation_deficit} "\
              "should be below 1e-6"
        assert m.truncation_deficit < 1e-6, msg
        assert_allclose(m.cdf(m.high), 1.0)

    for k, T in [(6, 15), (7, 10)]:
        m = PowerLawMarginal(k)
        msg = f"Power law k = {k} should truncate at {T}, got {m.high}"
        assert m.high == T, msg
        assert m.truncation_deficit < 1e-6
        assert_allclose(m.cdf(m.high), 1.0)
    with pytest.raises(ValueError):
        PowerLawMarginal(2.0)


def test_product_density_and_gradient():
    f = ProductDensity([ExponentialMarginal(1.0), ExponentialMarginal(2.0)])
    x = np.array([0.5, 0.25])
    expected = np.exp(-0.5) * 2 * np.exp(-0.5)
    assert_allclose(eval_density(f, x), expected, rtol=1e-5)
    msg = "The exponential gradient is -lam_i f(x)"
    assert_allclose(eval_gradient(f, x), [-expected, -2 * expected],
                    rtol=1e-5, err_msg=msg)

    g = ProductDensity([UniformMarginal(), UniformMarginal()])
    assert g.is_uniform
    assert_allclose(g.gradient([[0.2, 0.3], [1.0, 1.0]]), 0.0)
    with pytest.raises(DomainError):
        g.pdf([1.5, 0.5])

    with pytest.raises(ValueError):
        ProductDensity([UniformMarginal()], box=Box([0, 0], [1, 1]))


def test_json_schema():
    d = {'marginals': [{'family': 'beta', 'a': 1, 'b': 2},
                       {'family': 'powerlaw', 'k': 6}]}
    f = density_from_dict(d)
    assert f.ndim == 2
    assert_allclose(f.box.highs, [1.0, 15.0])
    again = density_from_dict(f.to_dict())
    assert again.box == f.box

    m = marginal_from_dict({'family': 'exponential', 'lam': 1,
                            'truncation': 'inf'})
    assert not np.isfinite(m.high)

    bad = [{'marginals': [{'family': 'cauchy'}]},
           {'marginals': [{'family': 'uniform', 'c': 1}]},
           {'marginals': [{'family': 'beta', 'a': 0.5, 'b': 1}]},
           {'items': []}]
    for d in bad:
        with pytest.raises(SchemaError):
            density_from_dict(d)
