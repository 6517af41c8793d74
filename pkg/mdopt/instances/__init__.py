# -*- coding: utf-8 -*-

"""
Instances
=========
JSON descriptions of worked examples, builders for parameterised families
and the golden-example runner.

An instance file looks like::

    {"name": "mv",
     "distribution": {"marginals": [{"family": "uniform"}, ...]},
     "grid": {"nodes": 41, "radius": 2, "refine": 1, "scheme": "linear"},
     "tolerances": {"mass": 1e-6},
     "menu": {"items": [{"p": [1, 0], "t": 0.6667}, ...]},
     "bundle_price": 1.2 | "critical",
     "bracket": [0, 2],
     "exclusion": {"top": 0.667 | [[t, value], ...] |
                          {"intercept": 8, "slope": -0.5},
                   "right": ..., "price": 0.86 | "critical",
                   "method": "line-integrals",
                   "boundary_item": {"strip": "B", "t": 0}},
     "hypercube": {"n": 2, "c": 1},
     "solver": {"method": "auto"}}

Only ``distribution`` (or ``hypercube``) is required.
"""

__author__ = "mdopt developers"
__all__ = ["Instance", "load_instance", "instance_from_dict",
           "builtin_instances", "mv_instance", "uniform_4_16_4_7_instance",
           "beta_instance", "powerlaw_instance", "exponential_instance",
           "hypercube_instance", "single_item_instance", "run_instance",
           "load_golden", "compare_golden", "run_examples", ]

import json
import os
from dataclasses import dataclass, field
from os.path import join as pjoin

import numpy as np
from tqdm import tqdm

from ..distributions import density_from_dict
from ..duality import extract_dual, solve_primal, verify_certificate
from ..lattice import GridSpec, discretize_measure
from ..measure import build_transformed, region_mass
from ..mechanisms import (ExclusionSet2D, HypercubeInstance, Menu,
                          canonical_partition, check_grand_bundling,
                          check_optimal_menu, check_well_formed,
                          essential_form, find_critical_price,
                          hypercube_negative_mass, mechanism_from_partition,
                          menu_from_utility, menu_revenue, monotone_curve,
                          notbundling_bound)
from ..regions import HalfspaceRegion
from ..utils import SchemaError, get_logger, round_significant, timed

logger = get_logger(__name__)

INSTANCE_DIR = os.path.dirname(os.path.abspath(__file__))
GOLDEN_DIR = pjoin(INSTANCE_DIR, 'goldens')

_KNOWN_KEYS = {'name', 'description', 'distribution', 'grid', 'tolerances',
               'menu', 'bundle_price', 'bracket', 'exclusion', 'hypercube',
               'solver'}


@dataclass
class Instance:
    """A parsed instance file"""
    name: str
    description: str = ''
    density: object = None
    nodes: object = 21
    radius: int = 2
    refine: int = 1
    scheme: str = 'linear'
    tolerances: dict = field(default_factory=dict)
    menu: object = None
    bundle_price: object = None
    bracket: tuple = None
    exclusion: dict = None
    hypercube: object = None
    solver: dict = None
    raw: dict = field(default_factory=dict)

    def measure(self):
        if self.hypercube is not None:
            return self.hypercube.measure()
        return build_transformed(self.density)

    @property
    def box(self):
        if self.hypercube is not None:
            return self.hypercube.box
        return self.density.box

    def grid(self):
        return GridSpec(self.box, self.nodes)

    def resolved_bundle_price(self, mu=None, config=None):
        """The bundle price, solving ``mu({sum x <= p}) = 0`` if asked"""
        if self.bundle_price != 'critical':
            return float(self.bundle_price)
        if self.hypercube is not None:
            return self.hypercube.critical_price()
        mu = self.measure() if mu is None else mu
        ones = np.ones(mu.ndim)
        return find_critical_price(mu, lambda p: HalfspaceRegion(ones, p),
                                   bracket=self.bracket, config=config)

    def exclusion_set(self, mu=None, config=None):
        """The exclusion set, with its critical price resolved"""
        section = self.exclusion
        mu = self.measure() if mu is None else mu
        if section.get('method') == 'line-integrals':
            return ExclusionSet2D.from_line_integrals(
                mu, samples=int(section.get('samples', 40)),
                bracket=self.bracket, config=config)
        curves = {}
        for name in ('top', 'right'):
            curves[name], curves[f"{name}_prime"] = _parse_curve(
                section.get(name), name)
        price = section.get('price')
        base = ExclusionSet2D(self.box, **curves)
        if price == 'critical':
            price = find_critical_price(mu, base.with_price,
                                        bracket=self.bracket, config=config)
        return base if price is None else base.with_price(float(price))

    def to_dict(self):
        return dict(self.raw)


def _parse_curve(curve, name):
    if curve is None:
        return None, None
    if isinstance(curve, (int, float)):
        value = float(curve)
        return (lambda t: np.full(np.shape(t), value),
                lambda t: np.zeros(np.shape(t)))
    if isinstance(curve, dict):
        try:
            a, s = float(curve['intercept']), float(curve['slope'])
        except (KeyError, TypeError, ValueError) as err:
            msg = f"Error: An affine '{name}' curve needs numeric "\
                  f"'intercept' and 'slope'. Got {curve}"
            raise SchemaError(msg) from err
        return (lambda t: a + s * np.asarray(t),
                lambda t: np.full(np.shape(t), s))
    try:
        pairs = np.asarray(curve, dtype=np.float64)
    except (TypeError, ValueError) as err:
        msg = f"Error: Cannot read the '{name}' curve samples {curve}"
        raise SchemaError(msg) from err
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        msg = f"Error: The '{name}' curve samples must be [t, value] "\
              f"pairs. Got an array of shape {pairs.shape}"
        raise SchemaError(msg)
    return monotone_curve(pairs[:, 0], pairs[:, 1])


def instance_from_dict(d, name=None):
    """
    Validates and parses an instance dictionary

    Raises
    ------

    SchemaError
        Unknown keys, a missing distribution, or malformed sections

    """
    if not isinstance(d, dict):
        msg = f"Error: An instance must be a JSON object. Got "\
              f"{type(d).__name__}"
        raise SchemaError(msg)
    unknown = set(d) - _KNOWN_KEYS
    if unknown:
        msg = f"Error: Unknown instance key(s) {sorted(unknown)}. Known "\
              f"keys are {sorted(_KNOWN_KEYS)}"
        raise SchemaError(msg)
    if 'distribution' not in d and 'hypercube' not in d:
        msg = "Error: An instance needs a 'distribution' or a 'hypercube'"
        raise SchemaError(msg)

    inst = Instance(name=d.get('name', name or 'instance'),
                    description=d.get('description', ''), raw=dict(d))
    if 'hypercube' in d:
        try:
            inst.hypercube = HypercubeInstance(d['hypercube']['n'],
                                               d['hypercube']['c'])
        except (KeyError, TypeError, ValueError) as err:
            msg = f"Error: Invalid 'hypercube' section {d['hypercube']}: "\
                  f"{err}"
            raise SchemaError(msg) from err
    if 'distribution' in d:
        inst.density = density_from_dict(d['distribution'])
    elif inst.hypercube is not None:
        inst.density = inst.hypercube.density()

    grid = d.get('grid', {})
    try:
        inst.nodes = grid.get('nodes', 21)
        inst.radius = int(grid.get('radius', 2))
        inst.refine = int(grid.get('refine', 1))
        inst.scheme = str(grid.get('scheme', 'linear'))
    except (AttributeError, TypeError, ValueError) as err:
        msg = f"Error: Invalid 'grid' section {grid}: {err}"
        raise SchemaError(msg) from err
    if inst.scheme not in ('linear', 'voronoi'):
        msg = f"Error: grid scheme must be 'linear' or 'voronoi'. Got "\
              f"'{inst.scheme}'"
        raise SchemaError(msg)
    inst.tolerances = dict(d.get('tolerances', {}))

    ndim = len(inst.box.lows)
    if 'menu' in d:
        inst.menu = Menu.from_dict(d['menu'], ndim=ndim)
    if 'bundle_price' in d:
        price = d['bundle_price']
        if price != 'critical' and not isinstance(price, (int, float)):
            msg = f"Error: bundle_price must be a number or 'critical'. "\
                  f"Got {price}"
            raise SchemaError(msg)
        inst.bundle_price = price
    if 'bracket' in d:
        inst.bracket = tuple(float(v) for v in d['bracket'])
    if 'exclusion' in d:
        if ndim != 2:
            msg = "Error: Exclusion sets need a two-item distribution"
            raise SchemaError(msg)
        inst.exclusion = dict(d['exclusion'])
    if 'solver' in d:
        inst.solver = dict(d['solver'])
    return inst


def builtin_instances():
    """Names of the instance files shipped with the package"""
    return sorted(f[:-5] for f in os.listdir(INSTANCE_DIR)
                  if f.endswith('.json'))


def load_instance(source):
    """
    Loads an instance from a path, or by name from the shipped files

    Raises
    ------

    SchemaError
        Invalid JSON or schema

    OSError
        Missing file

    """
    if isinstance(source, dict):
        return instance_from_dict(source)
    path = source
    if not os.path.exists(path) and source in builtin_instances():
        path = pjoin(INSTANCE_DIR, f"{source}.json")
    with open(path, 'r') as f:
        try:
            d = json.load(f)
        except json.JSONDecodeError as err:
            msg = f"Error: '{path}' is not valid JSON: {err}"
            raise SchemaError(msg) from err
    name = os.path.splitext(os.path.basename(path))[0]
    return instance_from_dict(d, name=name)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def _uniform(a, b):
    return {'family': 'uniform', 'a': a, 'b': b}


def mv_instance(nodes=41):
    """Two uniform [0, 1] items: single items at 2/3, bundle at (4-sqrt2)/3"""
    bundle = (4.0 - np.sqrt(2.0)) / 3.0
    return instance_from_dict({
        'name': 'mv',
        'description': "Two i.i.d. uniform [0, 1] items",
        'distribution': {'marginals': [_uniform(0, 1), _uniform(0, 1)]},
        'grid': {'nodes': nodes, 'radius': 2, 'refine': 1},
        'menu': {'items': [{'p': [1, 0], 't': 2 / 3},
                           {'p': [0, 1], 't': 2 / 3},
                           {'p': [1, 1], 't': bundle}]},
        'exclusion': {'top': 2 / 3, 'right': 2 / 3, 'price': 'critical'}})


def uniform_4_16_4_7_instance(nodes=(25, 7)):
    """Uniform [4, 16] x [4, 7]: lottery (1/2, 1) at 8, bundle at 12"""
    return instance_from_dict({
        'name': 'uniform-4-16-4-7',
        'description': "Uniform items on [4, 16] and [4, 7]",
        'distribution': {'marginals': [_uniform(4, 16), _uniform(4, 7)]},
        'grid': {'nodes': list(nodes), 'radius': 2, 'refine': 2},
        'menu': {'items': [{'p': [0.5, 1], 't': 8.0},
                           {'p': [1, 1], 't': 12.0}]},
        'exclusion': {'top': {'intercept': 8.0, 'slope': -0.5}}})


def beta_instance(a=1.0, b=2.0, nodes=21):
    """Two i.i.d. Beta(a, b) items; exclusion set from line integrals"""
    marginal = {'family': 'beta', 'a': a, 'b': b}
    return instance_from_dict({
        'name': f"beta-{a:g}-{b:g}",
        'description': f"Two i.i.d. Beta({a:g}, {b:g}) items",
        'distribution': {'marginals': [marginal, dict(marginal)]},
        'grid': {'nodes': nodes, 'radius': 2},
        'bracket': [0.0, 2.0],
        'exclusion': {'method': 'line-integrals', 'samples': 40}})


def powerlaw_instance(k1=6.0, k2=7.0, nodes=(61, 41)):
    """Power-law items ``(k-1)/(1+x)^k``; grand bundling at the root price"""
    return instance_from_dict({
        'name': f"powerlaw-{k1:g}-{k2:g}",
        'description': "Truncated power-law items",
        'distribution': {'marginals': [{'family': 'powerlaw', 'k': k1},
                                       {'family': 'powerlaw', 'k': k2}]},
        'grid': {'nodes': list(nodes), 'radius': 2},
        'bracket': [0.0, 2.0],
        'bundle_price': 'critical'})


def exponential_instance(lam1=1.0, lam2=1.0, nodes=29):
    """
    Exponential items with ``lam1 >= lam2``:
    ``Z = {x + y <= p, lam1 x + lam2 y <= 2}``
    """
    if lam1 < lam2:
        msg = f"Error: Needs lam1 >= lam2. Got {lam1} and {lam2}"
        raise SchemaError(msg)
    return instance_from_dict({
        'name': f"exponential-{lam1:g}-{lam2:g}",
        'description': "Truncated exponential items",
        'distribution': {'marginals': [
            {'family': 'exponential', 'lam': lam1},
            {'family': 'exponential', 'lam': lam2}]},
        'grid': {'nodes': nodes, 'radius': 2},
        'bracket': [0.0, 2.0 / lam2],
        'exclusion': {'right': {'intercept': 2.0 / lam1,
                                'slope': -lam2 / lam1},
                      'price': 'critical',
                      'boundary_item': {'strip': 'B', 't': 0.0}}})


def hypercube_instance(n=2, c=1.0, nodes=None, price='critical'):
    """``n`` uniform [c, c+1] items in shifted coordinates"""
    if nodes is None:
        nodes = {1: 101, 2: 21, 3: 9}.get(n, 5)
    return instance_from_dict({
        'name': f"hypercube-{n}-{c:g}",
        'description': f"{n} i.i.d. uniform [{c:g}, {c + 1:g}] items",
        'hypercube': {'n': n, 'c': c},
        'grid': {'nodes': nodes, 'radius': 2},
        'bundle_price': price})


def single_item_instance(nodes=101):
    """One uniform [0, 1] item; the optimal posted price is 1/2"""
    return instance_from_dict({
        'name': 'single-item',
        'description': "One uniform [0, 1] item",
        'distribution': {'marginals': [_uniform(0, 1)]},
        'grid': {'nodes': nodes, 'radius': 2},
        'solver': {'method': 'auto'}})


# ---------------------------------------------------------------------------
# Golden runner
# ---------------------------------------------------------------------------

def run_instance(inst, config=None):
    """
    Runs every pipeline the instance asks for

    * ``hypercube``: closed-form negative mass and the not-bundling bound
    * ``menu``: essential form, then the optimal menu conditions and the
      expected revenue
    * ``bundle_price``: the grand-bundling conditions
    * ``exclusion``: canonical partition, well-formedness and the
      mechanism (revenue, optional boundary item)
    * ``solver``: primal LP, extracted certificate and its verification

    Returns
    -------

    report: dictionary
        Flat mapping of result names to rounded values

    """
    report = {'name': inst.name}
    mu = inst.measure()
    grid = inst.grid()
    tols = inst.tolerances
    tol, mass_tol = tols.get('dominance'), tols.get('mass')

    with timed(logger, f"Running instance '{inst.name}'"):
        if inst.hypercube is not None:
            hc = inst.hypercube
            report['negative_mass'] = hypercube_negative_mass(hc.n, hc.c)
            report['notbundling'] = notbundling_bound(hc.n, hc.c)

        if inst.menu is not None:
            menu = essential_form(inst.menu, inst.density, config=config)
            check = check_optimal_menu(menu, mu, grid, scheme=inst.scheme,
                                       refine=inst.refine, tol=tol,
                                       mass_tol=mass_tol, config=config)
            report['menu_items'] = len(menu)
            report['menu_optimal'] = check.passed
            report['menu_revenue'] = menu_revenue(menu, inst.density,
                                                  config=config)

        if inst.bundle_price is not None:
            price = inst.resolved_bundle_price(mu, config=config)
            check = check_grand_bundling(price, mu, grid, scheme=inst.scheme,
                                         refine=inst.refine, tol=tol,
                                         mass_tol=mass_tol, config=config)
            report['bundle_price'] = price
            report['grand_bundling_optimal'] = check.passed
            report['grand_bundling_failed'] = check.failed()

        if inst.exclusion is not None:
            Z = inst.exclusion_set(mu, config=config)
            cp = canonical_partition(Z)
            report['critical_price'] = cp.price
            report['critical_point'] = list(cp.critical_point)
            report['exclusion_mass'] = region_mass(mu, Z, config=config)
            check = check_well_formed(cp, mu, grid=grid,
                                      density=inst.density,
                                      tol=mass_tol, scheme=inst.scheme,
                                      config=config)
            report['well_formed'] = check.passed
            report['well_formed_failed'] = check.failed()
            mech = mechanism_from_partition(cp)
            report['mechanism_revenue'] = mech.revenue(inst.density,
                                                       config=config)
            item = inst.exclusion.get('boundary_item')
            if item is not None:
                best = mech.boundary_item(item['strip'], item['t'])
                report['boundary_item'] = {'p': list(best.p), 't': best.t}

        if inst.solver is not None:
            m = discretize_measure(mu, grid, scheme=inst.scheme,
                                   config=config)
            sol = solve_primal(m, radius=inst.radius,
                               method=inst.solver.get('method', 'auto'))
            cert = extract_dual(sol, m)
            check = verify_certificate(sol.u, cert, m, radius=inst.radius)
            report['primal_value'] = sol.value
            report['dual_value'] = check.dual_value
            report['gap'] = check.gap
            report['certificate_verified'] = check.passed
            recovered, _ = menu_from_utility(sol.u)
            report['recovered_menu'] = recovered.to_dict()['items']
    return round_significant(report)


def load_golden(name):
    """Expected values for a shipped instance"""
    path = pjoin(GOLDEN_DIR, f"{name}.json")
    with open(path, 'r') as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as err:
            msg = f"Error: Golden file '{path}' is not valid JSON: {err}"
            raise SchemaError(msg) from err


def _matches(expected, got, tol):
    if isinstance(expected, bool) or isinstance(got, bool):
        return expected == got
    if isinstance(expected, dict):
        return isinstance(got, dict) and all(
            k in got and _matches(v, got[k], tol)
            for k, v in expected.items())
    if isinstance(expected, (list, tuple)):
        return isinstance(got, (list, tuple)) and \
            len(expected) == len(got) and \
            all(_matches(e, g, tol) for e, g in zip(expected, got))
    if isinstance(expected, (int, float)):
        return isinstance(got, (int, float)) and abs(expected - got) <= tol
    return expected == got


def compare_golden(report, golden):
    """
    Differences between a run report and a golden file

    Returns
    -------

    mismatches: list of (key, expected, got)

    """
    default = float(golden.get('default_tolerance', 1e-6))
    tols = golden.get('tolerances', {})
    out = []
    for key, expected in golden.get('expected', {}).items():
        got = report.get(key)
        if not _matches(expected, got, float(tols.get(key, default))):
            out.append((key, expected, got))
    return out


def run_examples(names=None, config=None, show_progressbar=False):
    """
    Replays shipped instances against their goldens

    Returns
    -------

    results: dictionary
        ``name -> (report, mismatches)``

    """
    if names is None:
        names = [n for n in builtin_instances()
                 if os.path.exists(pjoin(GOLDEN_DIR, f"{n}.json"))]
    results = {}
    for name in tqdm(names, disable=not show_progressbar,
                     desc="Running examples"):
        report = run_instance(load_instance(name), config=config)
        mismatches = compare_golden(report, load_golden(name))
        if mismatches:
            logger.warning(f"{name}: {len(mismatches)} mismatch(es) against "
                           "the golden file")
        results[name] = (report, mismatches)
    return results
