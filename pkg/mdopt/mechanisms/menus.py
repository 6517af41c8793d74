# -*- coding: utf-8 -*-

"""
Menus
=====
Finite menus of lotteries, the polyhedral regions of types choosing each
entry, and the region-wise dominance tests that decide whether a menu (or
a single grand-bundle price) is optimal.
"""

__author__ = "mdopt developers"
__all__ = ["MenuItem", "Menu", "MenuChoice", "RegionPartition",
           "MechanismReport", "menu_utility", "menu_regions",
           "essential_form", "menu_revenue", "check_optimal_menu",
           "check_grand_bundling", "myerson_price", "single_item_revenue",
           "dominance_direction", "menu_from_utility", ]

from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ..dominance import convex_dominates
from ..lattice import discretize_measure
from ..measure import probability, region_mass
from ..regions import (ComplementRegion, HalfspaceRegion,
                       IntersectionRegion)
from ..utils import (DEFAULT_TOLERANCES, PreconditionError, SchemaError,
                     as_points, get_logger, timed)

logger = get_logger(__name__)

MenuChoice = namedtuple('MenuChoice', ['value', 'index', 'tie'])


@dataclass(frozen=True)
class MenuItem:
    """Lottery ``p`` (one probability per item) at price ``t``"""
    p: tuple
    t: float

    def __post_init__(self):
        p = tuple(float(v) for v in np.atleast_1d(self.p))
        if any(v < 0.0 or v > 1.0 for v in p):
            msg = f"Error: Allocation probabilities must lie in [0, 1]. "\
                  f"Got {p}"
            raise ValueError(msg)
        object.__setattr__(self, 'p', p)
        object.__setattr__(self, 't', float(self.t))

    def to_dict(self):
        return {'p': list(self.p), 't': self.t}


class Menu(object):
    """
    Finite menu. Option 0 is always the zero option ``(0, 0)``; option
    ``k >= 1`` is ``items[k-1]``.
    """

    def __init__(self, items, ndim=None):
        items = [it if isinstance(it, MenuItem) else MenuItem(*it)
                 for it in items]
        if ndim is None:
            if not items:
                msg = "Error: Need ndim for a menu without items"
                raise ValueError(msg)
            ndim = len(items[0].p)
        if any(len(it.p) != ndim for it in items):
            msg = f"Error: Every menu item needs {ndim} probabilities"
            raise ValueError(msg)
        self.items = tuple(items)
        self.ndim = int(ndim)

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __repr__(self):
        return f"Menu({[(it.p, it.t) for it in self.items]})"

    @property
    def allocations(self):
        """Option allocations, shape (len+1, ndim); row 0 is zero"""
        return np.vstack([np.zeros(self.ndim)] +
                         [np.asarray(it.p) for it in self.items])

    @property
    def prices(self):
        return np.concatenate([[0.0], [it.t for it in self.items]])

    def option(self, index):
        if index == 0:
            return MenuItem((0.0, ) * self.ndim, 0.0)
        return self.items[index - 1]

    def utilities(self, points):
        """Utility of every option, shape (npoints, len+1)"""
        pts = as_points(points, self.ndim)
        return pts @ self.allocations.T - self.prices[None, :]

    def to_dict(self):
        return {'items': [it.to_dict() for it in self.items]}

    @classmethod
    def from_dict(cls, d, ndim=None):
        try:
            items = [MenuItem(it['p'], it['t']) for it in d['items']]
            return cls(items, ndim=ndim)
        except (KeyError, TypeError, ValueError) as err:
            msg = f"Error: Invalid menu JSON: {err}"
            raise SchemaError(msg) from err


@dataclass
class RegionPartition:
    """
    Types choosing each option: exact polyhedral regions plus node labels
    on a grid (``ties`` flags nodes indifferent between distinct best
    options)
    """
    menu: Menu
    grid: object
    regions: list
    labels: np.ndarray
    ties: np.ndarray

    def region(self, index):
        return self.regions[index]

    def counts(self):
        return np.bincount(self.labels.ravel(),
                           minlength=len(self.menu) + 1)


@dataclass
class MechanismReport:
    """Per-condition verdicts of an optimality check"""
    conditions: dict
    info: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c['passed'] for c in self.conditions.values())

    def failed(self):
        return [name for name, c in self.conditions.items()
                if not c['passed']]

    def to_dict(self):
        return {'passed': self.passed, 'conditions': self.conditions,
                'info': self.info}


def menu_utility(menu, x, tol=1e-12):
    """
    Buyer utility at a single type ``x``

    Returns
    -------

    choice: MenuChoice
        ``(value, index, tie)``; ties go to the lower option index and
        set ``tie``

    """
    util = menu.utilities(x)[0]
    best = float(util.max())
    winners = np.nonzero(util >= best - tol)[0]
    return MenuChoice(best, int(winners[0]), bool(winners.size > 1))


def _option_region(menu, k):
    """
    Types choosing option ``k``: strictly better than every lower option
    and at least as good as every higher one
    """
    P, t = menu.allocations, menu.prices
    pieces = []
    for j in range(len(menu) + 1):
        if j == k:
            continue
        w = P[k] - P[j]
        pieces.append(HalfspaceRegion(w, t[k] - t[j], side='above',
                                      strict=j < k))
    if not pieces:
        return None
    return IntersectionRegion(pieces)


def menu_regions(menu, grid, tol=1e-12):
    """
    Partition of the type box by chosen option

    Parameters
    ----------

    menu: Menu, required

    grid: GridSpec, required
        Nodes to label

    tol: float, optional, default: 1e-12
        Utility differences below this count as ties

    Returns
    -------

    partition: RegionPartition

    """
    util = menu.utilities(grid.coords())
    best = util.max(axis=1)
    near = util >= best[:, None] - tol
    labels = np.argmax(near, axis=1)
    ties = near.sum(axis=1) > 1
    regions = [_option_region(menu, k) for k in range(len(menu) + 1)]
    return RegionPartition(menu=menu, grid=grid, regions=regions,
                           labels=labels.reshape(grid.shape),
                           ties=ties.reshape(grid.shape))


def _dedupe(items, tol=1e-12):
    out = []
    for it in items:
        if any(np.allclose(it.p, o.p, atol=tol) and abs(it.t - o.t) <= tol
               for o in out):
            continue
        out.append(it)
    return out


def essential_form(menu, f, threshold=1e-12, config=None):
    """
    Drops duplicate items and items chosen with probability at most
    ``threshold`` under ``f``; repeats until nothing changes
    """
    items = _dedupe(menu.items)
    while True:
        current = Menu(items, ndim=menu.ndim)
        probs = [probability(f, _option_region(current, k), config=config)
                 for k in range(1, len(current) + 1)]
        keep = [it for it, pr in zip(items, probs) if pr > threshold]
        if len(keep) == len(items):
            return current
        logger.info(f"Dropping {len(items) - len(keep)} menu item(s) never "
                    "chosen")
        items = keep


def menu_revenue(menu, f, config=None):
    """Expected payment ``sum_k t_k Pr_f[region_k]``"""
    total = 0.0
    for k in range(1, len(menu) + 1):
        region = _option_region(menu, k)
        total += menu.option(k).t * probability(f, region, config=config)
    return float(total)


def dominance_direction(p, tol=1e-12):
    """
    Monotonicity signs for the region of allocation ``p``: +1 where
    ``p_i = 0``, -1 where ``p_i = 1``, 0 otherwise
    """
    p = np.asarray(p, dtype=np.float64)
    v = np.zeros(p.size, dtype=int)
    v[p <= tol] = 1
    v[p >= 1.0 - tol] = -1
    return tuple(int(s) for s in v)


def region_dominance(mu, region, v, grid, scheme='linear', tol=None,
                     mass_tol=None, config=None):
    """
    Discretises ``mu_+`` and ``mu_-`` restricted to ``region`` and decides
    ``mu_-|_R >=_cvx(v) mu_+|_R``

    ``tol=None`` is the ``dominance`` default scaled by the region mass
    (at least one unit); the test functions take values in [-1, 1].

    Returns
    -------

    entry: dict
        ``passed``, ``verdict``, ``condition``, masses and LP minimum

    """
    mass_tol = DEFAULT_TOLERANCES['mass'] if mass_tol is None else mass_tol
    plus = discretize_measure(mu.positive_part().restrict(region), grid,
                              scheme=scheme, config=config)
    minus = -discretize_measure(mu.negative_part().restrict(region), grid,
                                scheme=scheme, config=config)
    entry = {'v': list(v), 'mass_plus': plus.total,
             'mass_minus': minus.total}
    diff = plus.total - minus.total
    if abs(diff) > mass_tol:
        entry.update({'passed': False, 'verdict': 'fails',
                      'condition': 'mass-balance', 'value': diff})
        return entry
    if plus.total <= mass_tol:
        entry.update({'passed': True, 'verdict': 'dominates',
                      'condition': None, 'value': 0.0})
        return entry
    minus = minus * (plus.total / minus.total)
    if tol is None:
        tol = DEFAULT_TOLERANCES['dominance'] * max(1.0, plus.total)
    res = convex_dominates(minus, plus, v=v, tol=tol,
                           mass_tol=max(1e-9, 1e-9 * plus.total))
    entry.update({'passed': res.dominates, 'verdict': res.verdict,
                  'condition': res.condition, 'value': res.value,
                  'tolerance': tol})
    return entry


def check_optimal_menu(menu, mu, grid, scheme='linear', refine=2, tol=None,
                       mass_tol=None, config=None):
    """
    Region-wise test of the optimal menu conditions

    For every option with a non-empty region ``R`` the positive and
    negative parts of ``mu|_R`` must balance and
    ``mu_+|_R <=_cvx(v) mu_-|_R`` must hold with the direction ``v`` of
    :func:`dominance_direction`.

    Parameters
    ----------

    menu: Menu, required
        Should be in essential form

    mu: TransformedMeasure, required

    grid: GridSpec, required

    scheme: string, optional, default: 'linear'

    refine: integer, optional, default: 2
        Region checks run on ``grid.refine(refine)``

    tol, mass_tol: float, optional, default: None
        See :func:`region_dominance`

    Returns
    -------

    report: MechanismReport
        One condition per option, keyed ``'option_<k>'``

    """
    check_grid = grid.refine(refine) if refine > 1 else grid
    conditions = {}
    with timed(logger, f"Checking a {len(menu)}-item menu on "
               f"{list(check_grid.nodes)} nodes"):
        for k in range(len(menu) + 1):
            region = _option_region(menu, k)
            item = menu.option(k)
            v = dominance_direction(item.p)
            entry = region_dominance(mu, region, v, check_grid,
                                     scheme=scheme, tol=tol,
                                     mass_tol=mass_tol, config=config)
            entry.update({'p': list(item.p), 't': item.t,
                          'region_mass': region_mass(mu, region,
                                                     config=config)})
            conditions[f"option_{k}"] = entry
            logger.info(f"Option {k} {item.p} at {item.t:.6g}: "
                        f"{entry['verdict']}")
    return MechanismReport(conditions=conditions,
                           info={'nodes': list(check_grid.nodes),
                                 'scheme': scheme})


def check_grand_bundling(price, mu, grid, scheme='linear', refine=1,
                         tol=None, mass_tol=None, config=None):
    """
    Grand bundling at ``price`` is optimal iff
    ``mu|_Z <=_cvx 0`` on ``Z = {sum x <= price}`` and ``mu|_W >=_2 0`` on
    the complement

    Raises
    ------

    PreconditionError
        ``price`` outside ``(0, sum highs)``

    """
    highs = mu.box.highs
    if not 0.0 < price < highs.sum():
        msg = f"Error: The bundle price must lie in (0, {highs.sum():g}). "\
              f"Got {price}"
        raise PreconditionError(msg)
    n = mu.ndim
    check_grid = grid.refine(refine) if refine > 1 else grid
    below = HalfspaceRegion(np.ones(n), price, side='below')
    above = ComplementRegion(below)
    conditions = {}
    with timed(logger, f"Checking grand bundling at {price:.6g}"):
        entry = region_dominance(mu, below, (1, ) * n, check_grid,
                                 scheme=scheme, tol=tol, mass_tol=mass_tol,
                                 config=config)
        entry['region_mass'] = region_mass(mu, below, config=config)
        conditions['exclusion'] = entry
        entry = region_dominance(mu, above, (-1, ) * n, check_grid,
                                 scheme=scheme, tol=tol, mass_tol=mass_tol,
                                 config=config)
        entry['region_mass'] = region_mass(mu, above, config=config)
        conditions['bundle'] = entry
    return MechanismReport(conditions=conditions,
                           info={'price': float(price),
                                 'nodes': list(check_grid.nodes)})


def myerson_price(m):
    """
    Revenue-maximising posted price for one item: the zero of the
    virtual value (the lowest type when it is already non-negative)
    """
    lo, hi = m.low, m.high
    phi_lo = float(m.virtual_value(lo))
    if phi_lo >= 0:
        return lo
    hi_eval = hi - 1e-12 * max(1.0, abs(hi))
    if float(m.virtual_value(hi_eval)) <= 0:
        return hi
    return float(brentq(lambda z: float(m.virtual_value(z)), lo, hi_eval,
                        xtol=1e-12))


def single_item_revenue(m, price):
    """``price * (1 - F(price))``"""
    return float(price * (1.0 - float(m.cdf(price))))


def menu_from_utility(u, decimals=2, min_share=0.01):
    """
    Reads a menu off a grid utility: allocations are forward-difference
    gradients (clipped to [0, 1]), prices ``p . x - u``. Options chosen by
    fewer than ``min_share`` of the nodes are dropped.

    Returns
    -------

    menu: Menu
        Items sorted by price

    shares: list of float
        Fraction of nodes choosing each item

    """
    grid = u.grid
    values = u.values
    grads = []
    for axis, h in enumerate(grid.spacing):
        d = np.diff(values, axis=axis) / h
        last = np.take(d, [-1], axis=axis)
        grads.append(np.concatenate([d, last], axis=axis).ravel())
    p = np.clip(np.column_stack(grads), 0.0, 1.0)
    t = np.sum(p * grid.coords(), axis=1) - values.ravel()
    rows = np.round(np.column_stack([p, t]), decimals)
    rows[rows == 0.0] = 0.0
    unique, counts = np.unique(rows, axis=0, return_counts=True)
    share = counts / rows.shape[0]
    items, shares = [], []
    for row, frac in zip(unique, share):
        if frac < min_share or not np.any(row[:-1] > 0):
            continue
        items.append(MenuItem(tuple(row[:-1]), row[-1]))
        shares.append(float(frac))
    order = np.argsort([it.t for it in items], kind='stable')
    return (Menu([items[k] for k in order], ndim=grid.ndim),
            [shares[k] for k in order])
