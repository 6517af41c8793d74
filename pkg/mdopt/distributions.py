# -*- coding: utf-8 -*-

"""
Type Distributions
==================
Product densities over a box of types. Each coordinate carries one of the
supported marginal families (uniform, beta, truncated exponential and
truncated power law); the joint density is the product of the marginals.
"""

__author__ = "mdopt developers"
__all__ = ["Box", "MarginalDensity", "UniformMarginal", "BetaMarginal",
           "ExponentialMarginal", "PowerLawMarginal", "ProductDensity",
           "eval_density", "eval_gradient", "virtual_value",
           "marginal_from_dict", "density_from_dict", ]

import numpy as np

from .utils import DomainError, SchemaError, SingularityError, as_points

_EDGE_TOL = 1e-12


class Box(object):
    """
    Axis-aligned box ``prod_i [lows[i], highs[i]]`` of non-negative types
    """

    def __init__(self, lows, highs):
        lows = np.atleast_1d(np.asarray(lows, dtype=np.float64)).copy()
        highs = np.atleast_1d(np.asarray(highs, dtype=np.float64)).copy()
        if lows.ndim != 1 or lows.shape != highs.shape or lows.size < 1:
            msg = "Error: A box needs two 1-d arrays of equal (non-zero) "\
                  f"length. Got lows = {lows} and highs = {highs}"
            raise ValueError(msg)
        if np.any(lows < 0):
            msg = f"Error: Types must be non-negative. Got lows = {lows}"
            raise ValueError(msg)
        if np.any(~(lows < highs)):
            msg = "Error: Every interval must satisfy low < high. Got "\
                  f"lows = {lows}, highs = {highs}"
            raise ValueError(msg)
        lows.setflags(write=False)
        highs.setflags(write=False)
        self.lows = lows
        self.highs = highs

    @property
    def ndim(self):
        return self.lows.size

    @property
    def widths(self):
        return self.highs - self.lows

    @property
    def volume(self):
        return float(np.prod(self.widths))

    def contains(self, points, tol=_EDGE_TOL):
        pts = as_points(points, self.ndim)
        return np.all((pts >= self.lows - tol) & (pts <= self.highs + tol),
                      axis=1)

    def __eq__(self, other):
        return isinstance(other, Box) and \
            np.array_equal(self.lows, other.lows) and \
            np.array_equal(self.highs, other.highs)

    def __hash__(self):
        return hash((tuple(self.lows), tuple(self.highs)))

    def __repr__(self):
        return f"Box(lows={self.lows.tolist()}, highs={self.highs.tolist()})"

    def to_dict(self):
        return {'lows': self.lows.tolist(), 'highs': self.highs.tolist()}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(d['lows'], d['highs'])
        except (KeyError, TypeError) as err:
            msg = f"Error: A box needs 'lows' and 'highs' lists. Got {d}"
            raise SchemaError(msg) from err


class MarginalDensity(object):
    """
    Base class for one-dimensional densities on ``[low, high]``.

    Sub-classes implement ``_pdf``, ``_dpdf`` and ``_cdf`` on the support;
    the public methods handle shapes and the domain checks.
    """
    family = None

    def __init__(self, low, high, deficit=0.0):
        self.low = float(low)
        self.high = float(high)
        self.truncation_deficit = float(deficit)

    @property
    def is_uniform(self):
        return False

    @property
    def is_truncated(self):
        return self.truncation_deficit > 0.0

    def _check_domain(self, z):
        z = np.asarray(z, dtype=np.float64)
        if np.any(z < self.low - _EDGE_TOL) or \
           np.any(z > self.high + _EDGE_TOL):
            msg = f"Error: Point(s) outside the support [{self.low}, "\
                  f"{self.high}] of the {self.family} marginal"
            raise DomainError(msg)
        return np.clip(z, self.low, self.high)

    def pdf(self, z):
        return self._pdf(self._check_domain(z))

    def dpdf(self, z):
        """Derivative of the density (one-sided at the endpoints)"""
        return self._dpdf(self._check_domain(z))

    def cdf(self, z):
        return self._cdf(self._check_domain(z))

    def x_dpdf(self, z):
        """``z * f'(z)``; the building block of the transformed measure"""
        z = self._check_domain(z)
        return z * self._dpdf(z)

    def log_derivative(self, z):
        z = self._check_domain(z)
        f = self._pdf(z)
        if np.any(f <= 0):
            msg = f"Error: The {self.family} density vanishes at "\
                  f"z = {z[f <= 0] if np.ndim(z) else z}; its "\
                  "log-derivative is undefined"
            raise SingularityError(msg)
        return self._dpdf(z) / f

    def virtual_value(self, z):
        """Myerson virtual value ``z - (1 - F(z))/f(z)``"""
        z = self._check_domain(z)
        f = self._pdf(z)
        if np.any(f <= 0):
            msg = f"Error: The {self.family} density vanishes at the "\
                  "requested point; the virtual value is undefined"
            raise SingularityError(msg)
        return z - (1.0 - self._cdf(z)) / f

    def to_dict(self):
        raise NotImplementedError

    def __repr__(self):
        params = ', '.join(f"{k}={v}" for k, v in self.to_dict().items()
                           if k != 'family')
        return f"{self.__class__.__name__}({params})"


class UniformMarginal(MarginalDensity):
    family = 'uniform'

    def __init__(self, a=0.0, b=1.0):
        if not (0 <= a < b):
            msg = f"Error: Uniform marginal needs 0 <= a < b. Got a = {a}, "\
                  f"b = {b}"
            raise ValueError(msg)
        super().__init__(a, b)
        self.a = float(a)
        self.b = float(b)

    @property
    def is_uniform(self):
        return True

    def _pdf(self, z):
        return np.full_like(z, 1.0 / (self.b - self.a), dtype=np.float64)

    def _dpdf(self, z):
        return np.zeros_like(z, dtype=np.float64)

    def _cdf(self, z):
        return (z - self.a) / (self.b - self.a)

    def to_dict(self):
        return {'family': self.family, 'a': self.a, 'b': self.b}


class BetaMarginal(MarginalDensity):
    """
    Beta(a, b) on [0, 1]. Requires ``a, b >= 1`` so that the density and
    its derivative stay bounded.
    """
    family = 'beta'

    def __init__(self, a, b):
        from scipy.special import beta

        if a < 1 or b < 1:
            msg = "Error: Beta marginals need a >= 1 and b >= 1 for a "\
                  f"bounded derivative. Got a = {a}, b = {b}"
            raise ValueError(msg)
        super().__init__(0.0, 1.0)
        self.a = float(a)
        self.b = float(b)
        self._norm = 1.0 / beta(self.a, self.b)

    def _pdf(self, z):
        return self._norm * z**(self.a - 1) * (1 - z)**(self.b - 1)

    def _dpdf(self, z):
        # termwise so that a = 1 or b = 1 never produces 0 * inf
        out = np.zeros_like(z, dtype=np.float64)
        if self.a != 1:
            out = out + (self.a - 1) * z**(self.a - 2) * (1 - z)**(self.b - 1)
        if self.b != 1:
            out = out - (self.b - 1) * z**(self.a - 1) * (1 - z)**(self.b - 2)
        return self._norm * out

    def _cdf(self, z):
        from scipy.special import betainc
        return betainc(self.a, self.b, z)

    def to_dict(self):
        return {'family': self.family, 'a': self.a, 'b': self.b}


class ExponentialMarginal(MarginalDensity):
    """
    Exponential(lam) truncated to [0, T] and renormalised. The default
    truncation ``T = 14/lam`` leaves a tail mass below 1e-6;
    ``truncation=np.inf`` keeps the untruncated density (only usable for
    point evaluations).
    """
    family = 'exponential'

    def __init__(self, lam, truncation=None):
        if not lam > 0:
            msg = f"Error: Exponential rate must be positive. Got {lam}"
            raise ValueError(msg)
        lam = float(lam)
        if truncation is None:
            truncation = 14.0 / lam
        truncation = float(truncation)
        deficit = float(np.exp(-lam * truncation))
        super().__init__(0.0, truncation, deficit)
        self.lam = lam
        self._norm = 1.0 / (1.0 - deficit)

    def _pdf(self, z):
        return self._norm * self.lam * np.exp(-self.lam * z)

    def _dpdf(self, z):
        return -self.lam * self._pdf(z)

    def _cdf(self, z):
        return self._norm * (-np.expm1(-self.lam * z))

    def to_dict(self):
        trunc = self.high if np.isfinite(self.high) else 'inf'
        return {'family': self.family, 'lam': self.lam, 'truncation': trunc}


class PowerLawMarginal(MarginalDensity):
    """
    Density ``(k-1)/(1+z)**k`` truncated to [0, T]. The default ``T`` is
    the smallest integer with tail mass ``(1+T)**(1-k)`` below ``tail``.
    """
    family = 'powerlaw'

    def __init__(self, k, truncation=None, tail=1e-6):
        if not k > 2:
            msg = "Error: Power-law exponent must exceed 2 for a finite "\
                  f"mean. Got k = {k}"
            raise ValueError(msg)
        k = float(k)
        if truncation is None:
            truncation = max(0.0, np.floor(tail**(-1.0 / (k - 1))) - 1.0)
            while (1.0 + truncation)**(1.0 - k) >= tail:
                truncation += 1.0
        truncation = float(truncation)
        deficit = float((1.0 + truncation)**(1.0 - k))
        super().__init__(0.0, truncation, deficit)
        self.k = k
        self._norm = 1.0 / (1.0 - deficit)

    def _pdf(self, z):
        return self._norm * (self.k - 1) * (1.0 + z)**(-self.k)

    def _dpdf(self, z):
        return -self.k * self._pdf(z) / (1.0 + z)

    def _cdf(self, z):
        return self._norm * (1.0 - (1.0 + z)**(1.0 - self.k))

    def to_dict(self):
        trunc = self.high if np.isfinite(self.high) else 'inf'
        return {'family': self.family, 'k': self.k, 'truncation': trunc}


_FAMILIES = {'uniform': (UniformMarginal, ('a', 'b')),
             'beta': (BetaMarginal, ('a', 'b')),
             'exponential': (ExponentialMarginal, ('lam', 'truncation')),
             'powerlaw': (PowerLawMarginal, ('k', 'truncation')), }


def marginal_from_dict(d):
    """Builds a marginal from ``{"family": ..., <parameters>}``"""
    if not isinstance(d, dict) or 'family' not in d:
        msg = f"Error: A marginal needs a 'family' key. Got {d}"
        raise SchemaError(msg)
    family = str(d['family']).lower()
    if family not in _FAMILIES:
        msg = f"Error: Unknown marginal family '{family}'. Known families "\
              f"are {list(_FAMILIES)}"
        raise SchemaError(msg)
    cls, names = _FAMILIES[family]
    kwargs = {}
    for name in names:
        if name in d:
            val = d[name]
            if val == 'inf':
                val = np.inf
            kwargs[name] = val
    unknown = set(d) - set(names) - {'family'}
    if unknown:
        msg = f"Error: Unknown parameter(s) {sorted(unknown)} for the "\
              f"'{family}' family"
        raise SchemaError(msg)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as err:
        msg = f"Error: Invalid parameters for the '{family}' family: {err}"
        raise SchemaError(msg) from err


class ProductDensity(object):
    """
    Joint density ``f(x) = prod_i f_i(x_i)`` over a box

    Parameters
    ----------

    marginals: list of MarginalDensity, required
        One marginal per item

    box: Box, optional, default: None
        Type box. Defaults to the product of the marginal supports; a
        user-supplied box must lie inside those supports

    """

    def __init__(self, marginals, box=None):
        marginals = list(marginals)
        if len(marginals) == 0:
            raise ValueError("Error: Need at least one marginal")
        supports = Box([m.low for m in marginals], [m.high for m in marginals])
        if box is None:
            box = supports
        if not isinstance(box, Box):
            box = Box(*box)
        if box.ndim != len(marginals):
            msg = f"Error: Box dimension {box.ndim} does not match the "\
                  f"number of marginals {len(marginals)}"
            raise ValueError(msg)
        if np.any(box.lows < supports.lows - _EDGE_TOL) or \
           np.any(box.highs > supports.highs + _EDGE_TOL):
            msg = f"Error: The box {box} is not contained in the marginal "\
                  f"supports {supports}"
            raise ValueError(msg)
        if not np.all(np.isfinite(box.highs)):
            msg = "Error: The type box must be bounded; truncate unbounded "\
                  "marginals first"
            raise ValueError(msg)
        self.marginals = tuple(marginals)
        self.box = box

    @property
    def ndim(self):
        return self.box.ndim

    @property
    def is_uniform(self):
        return all(m.is_uniform for m in self.marginals)

    @property
    def truncation_deficits(self):
        return [m.truncation_deficit for m in self.marginals]

    def _checked(self, points):
        pts = as_points(points, self.ndim)
        if not np.all(self.box.contains(pts)):
            msg = f"Error: Point(s) outside the type box {self.box}"
            raise DomainError(msg)
        return np.clip(pts, self.box.lows, self.box.highs)

    def marginal_values(self, points):
        pts = self._checked(points)
        return np.column_stack([m.pdf(pts[:, i])
                                for i, m in enumerate(self.marginals)])

    def pdf(self, points):
        return np.prod(self.marginal_values(points), axis=1)

    def gradient(self, points):
        pts = self._checked(points)
        vals = np.column_stack([m.pdf(pts[:, i])
                                for i, m in enumerate(self.marginals)])
        if np.any(vals <= 0):
            msg = "Error: A marginal density vanishes at the requested "\
                  "point; the gradient's log-derivative form is undefined"
            raise SingularityError(msg)
        ders = np.column_stack([m.dpdf(pts[:, i])
                                for i, m in enumerate(self.marginals)])
        joint = np.prod(vals, axis=1)
        return joint[:, None] * ders / vals

    def to_dict(self):
        return {'marginals': [m.to_dict() for m in self.marginals],
                'box': self.box.to_dict()}

    def __repr__(self):
        return f"ProductDensity({list(self.marginals)}, box={self.box})"


def density_from_dict(d):
    """
    Builds a ProductDensity from
    ``{"marginals": [...], "box": {"lows": [...], "highs": [...]}}``;
    the box is optional
    """
    if not isinstance(d, dict) or 'marginals' not in d:
        msg = "Error: A distribution needs a 'marginals' list"
        raise SchemaError(msg)
    marginals = [marginal_from_dict(m) for m in d['marginals']]
    box = Box.from_dict(d['box']) if d.get('box') is not None else None
    try:
        return ProductDensity(marginals, box=box)
    except ValueError as err:
        raise SchemaError(str(err)) from err


def eval_density(d, x):
    """
    Returns ``f(x)`` for a single point; raises ``DomainError`` outside
    the box
    """
    return float(d.pdf(x)[0])


def eval_gradient(d, x):
    """
    Returns ``grad f(x)`` for a single point. Component ``i`` equals
    ``f(x) f_i'(x_i)/f_i(x_i)``
    """
    return d.gradient(x)[0]


def virtual_value(m, z):
    """Myerson virtual value of marginal ``m`` at ``z``"""
    out = m.virtual_value(z)
    return float(out) if np.ndim(out) == 0 else out
