# -*- coding: utf-8 -*-

"""
Duality
=======
The discretised revenue problem ``max sum_x u(x) m(x)`` over grid
utilities (monotone, convex, 1-Lipschitz, ``u(x_low) = 0``), the transport
certificate read off its LP multipliers, and the complementary-slackness
checks that certify a (utility, certificate) pair.

Multiplier dictionary (rows are written as ``A u <= b``):

* Lipschitz row ``u(x + h e_i) - u(x) <= h_i``: transport of the multiplier
  from ``x + h e_i`` down to ``x``
* monotone row ``u(x) - u(x + h e_i) <= 0``: upward transfer inside the
  shuffle
* convex row ``2u(x) - u(x+d) - u(x-d) <= 0``: mean-preserving spread of
  the multiplier from ``x`` to ``x +/- d`` inside the shuffle
"""

__author__ = "mdopt developers"
__all__ = ["PrimalSolution", "DualCertificate", "VerificationReport",
           "solve_primal", "extract_dual", "verify_certificate",
           "duality_gap", "feasible_certificate", ]

from dataclasses import dataclass, field

import numpy as np
import pandas as pd
import scipy.sparse as sp

from .dominance import convex_dominates
from .lattice import (CONVEX, LIPSCHITZ, MONOTONE, ConeSpec, GridFunction,
                      GridMeasure, GridSpec, cone_constraints, is_in_cone)
from .lp import solve_lp
from .utils import (DEFAULT_TOLERANCES, PreconditionError, SchemaError,
                    SolverError, get_logger, timed, write_arrays_h5)

logger = get_logger(__name__)


@dataclass
class PrimalSolution:
    u: GridFunction
    value: float
    status: str
    nit: int
    backend: str
    constraints: object = None
    multipliers: np.ndarray = None
    eq_multiplier: float = 0.0


@dataclass
class DualCertificate:
    """
    Transport plan (flat node indices ``sources -> sinks`` with
    non-negative ``masses``) and shuffle measure ``alpha`` with
    ``gamma_1 - gamma_2 = m + alpha``
    """
    grid: object
    sources: np.ndarray
    sinks: np.ndarray
    masses: np.ndarray
    alpha: GridMeasure
    degenerate: bool = False
    transfers: dict = field(default_factory=dict)
    spreads: dict = field(default_factory=dict)

    @property
    def value(self):
        coords = self.grid.coords()
        dist = np.abs(coords[self.sources] - coords[self.sinks]).sum(axis=1)
        return float(np.dot(self.masses, dist))

    def gamma_marginals(self):
        """``(gamma_1, gamma_2)`` as GridMeasures"""
        first = np.zeros(self.grid.size)
        second = np.zeros(self.grid.size)
        np.add.at(first, self.sources, self.masses)
        np.add.at(second, self.sinks, self.masses)
        return GridMeasure(self.grid, first), GridMeasure(self.grid, second)

    def spread_mass(self):
        return float(sum(self.spreads.values())) if self.spreads else 0.0

    def to_frame(self):
        shape = self.grid.shape
        src = np.array(np.unravel_index(self.sources, shape)).T
        dst = np.array(np.unravel_index(self.sinks, shape)).T
        cols = {}
        for k in range(self.grid.ndim):
            cols[f"x{k}"] = src[:, k]
        for k in range(self.grid.ndim):
            cols[f"y{k}"] = dst[:, k]
        cols['mass'] = self.masses
        return pd.DataFrame(cols)

    def to_dict(self):
        shape = self.grid.shape
        src = np.array(np.unravel_index(self.sources, shape)).T
        dst = np.array(np.unravel_index(self.sinks, shape)).T
        gamma = [{'x': s.tolist(), 'y': d.tolist(), 'mass': float(m)}
                 for s, d, m in zip(src, dst, self.masses)]
        return {'grid': self.grid.to_dict(), 'gamma': gamma,
                'alpha': self.alpha.mass.tolist(), 'value': self.value,
                'degenerate': bool(self.degenerate)}

    @classmethod
    def from_dict(cls, d):
        try:
            grid = GridSpec.from_dict(d['grid'])
            shape = grid.shape
            gamma = d.get('gamma', [])
            sources = np.array([np.ravel_multi_index(tuple(g['x']), shape)
                                for g in gamma], dtype=int)
            sinks = np.array([np.ravel_multi_index(tuple(g['y']), shape)
                              for g in gamma], dtype=int)
            masses = np.array([float(g['mass']) for g in gamma])
            alpha = GridMeasure(grid, d['alpha'])
        except (KeyError, TypeError, ValueError) as err:
            if isinstance(err, SchemaError):
                raise
            msg = f"Error: Invalid certificate JSON: {err}"
            raise SchemaError(msg) from err
        return cls(grid, sources, sinks, masses, alpha,
                   degenerate=bool(d.get('degenerate', False)))

    def write_h5(self, fname):
        return write_arrays_h5(fname, {'sources': self.sources,
                                       'sinks': self.sinks,
                                       'masses': self.masses,
                                       'alpha': self.alpha.mass},
                               attrs={'value': self.value})


@dataclass
class VerificationReport:
    primal_value: float
    dual_value: float
    gap: float
    conditions: dict
    info: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c['passed'] for c in self.conditions.values())

    def to_dict(self):
        return {'primal_value': self.primal_value,
                'dual_value': self.dual_value, 'gap': self.gap,
                'passed': self.passed, 'conditions': self.conditions,
                'info': self.info}


def duality_gap(primal, dual):
    """``dual - primal``"""
    return float(dual) - float(primal)


def solve_primal(m, cone=None, radius=2, method='auto'):
    """
    Maximises ``sum u m`` over the discrete utility cone with
    ``u(x_low) = 0``

    Parameters
    ----------

    m: GridMeasure, required

    cone: ConeSpec, optional, default: None
        Must be all-ones monotone with the Lipschitz flag; defaults to
        ``ConeSpec.utility(ndim, radius)``

    radius: integer, optional, default: 2
        Convexity stencil radius of the default cone

    method: string, optional, default: 'auto'
        LP backend (see :func:`mdopt.lp.solve_lp`)

    Returns
    -------

    solution: PrimalSolution

    """
    grid = m.grid
    if cone is None:
        cone = ConeSpec.utility(grid.ndim, radius=radius)
    if not cone.lipschitz or any(v != 1 for v in cone.direction):
        msg = f"Error: The revenue problem needs the non-decreasing "\
              f"1-Lipschitz cone. Got {cone}"
        raise PreconditionError(msg)
    cs = cone_constraints(grid, cone)
    A_eq = sp.csr_matrix(([1.0], ([0], [0])), shape=(1, grid.size))
    with timed(logger, f"Solving primal LP on {list(grid.nodes)} nodes"):
        try:
            res = solve_lp(-m.flat, A_ub=cs.A, b_ub=cs.b, A_eq=A_eq,
                           b_eq=[0.0], bounds=(None, None), method=method)
        except SolverError as err:
            msg = f"Error: The revenue LP could not be solved: {err}"
            raise SolverError(msg, status=err.status) from err
    u = GridFunction(grid, res.x)
    return PrimalSolution(u=u, value=m.integrate(u), status=res.status,
                          nit=res.nit, backend=res.backend, constraints=cs,
                          multipliers=np.clip(-res.ineq_duals, 0.0, None),
                          eq_multiplier=float(-res.eq_duals[0]))


def _refine_multipliers(cs, m, u, lam, slack_tol):
    """
    Minimum-spread multipliers on the rows that are tight at ``u``;
    any solution of ``A_act^T lam + eta e_0 = m`` there has the optimal
    dual value by complementary slackness
    """
    slack = cs.b - cs.A @ u.flat
    active = np.nonzero(slack <= slack_tol)[0]
    if active.size == 0:
        return lam, None
    At = cs.A[active].T.tocsr()
    e0 = sp.csr_matrix(([1.0], ([0], [0])), shape=(cs.grid.size, 1))
    A_eq = sp.hstack([At, e0]).tocsr()
    kinds = cs.kind[active]
    cost = np.where(kinds == CONVEX, 1.0,
                    np.where(kinds == MONOTONE, 1e-2, 0.0))
    cost = np.concatenate([cost, [0.0]])
    bounds = [(0.0, None)] * active.size + [(None, None)]
    res = solve_lp(cost, A_eq=A_eq, b_eq=m.flat, bounds=bounds,
                   method='highs')
    out = np.zeros_like(lam)
    out[active] = np.clip(res.x[:-1], 0.0, None)
    return out, float(res.x[-1])


def extract_dual(solution, m, refine=True, slack_tol=1e-7):
    """
    Dual certificate from the multipliers of a solved primal LP

    Parameters
    ----------

    solution: PrimalSolution, required

    m: GridMeasure, required
        The measure the primal was solved for

    refine: boolean, optional, default: True
        Re-solves the dual restricted to the tight rows, minimising the
        spread mass. Falls back to the raw multipliers when that fails

    slack_tol: float, optional, default: 1e-7
        Rows with slack below this are tight

    Returns
    -------

    certificate: DualCertificate

    """
    cs = solution.constraints
    if cs is None:
        cs = cone_constraints(m.grid, ConeSpec.utility(m.grid.ndim))
    lam = solution.multipliers
    eta = solution.eq_multiplier
    if lam is None:
        msg = "Error: The primal solution carries no multipliers"
        raise PreconditionError(msg)
    if refine:
        try:
            refined, refined_eta = _refine_multipliers(cs, m, solution.u,
                                                       lam, slack_tol)
            if refined_eta is not None:
                lam, eta = refined, refined_eta
        except SolverError as err:
            logger.warning(f"Multiplier refinement failed ({err}); "
                           "keeping the raw multipliers")

    size = m.grid.size
    alpha = np.zeros(size)
    keep = lam > 0

    lip = keep & (cs.kind == LIPSCHITZ)
    sources, sinks, masses = cs.plus[lip], cs.node[lip], lam[lip]

    mono = keep & (cs.kind == MONOTONE)
    np.add.at(alpha, cs.node[mono], -lam[mono])
    np.add.at(alpha, cs.plus[mono], lam[mono])

    cvx = keep & (cs.kind == CONVEX)
    np.add.at(alpha, cs.node[cvx], -2.0 * lam[cvx])
    np.add.at(alpha, cs.plus[cvx], lam[cvx])
    np.add.at(alpha, cs.minus[cvx], lam[cvx])

    alpha[0] -= eta

    slack = cs.b - cs.A @ solution.u.flat
    nactive = int(np.sum(slack <= slack_tol))
    transfers = {(int(a), int(b)): float(v) for a, b, v in
                 zip(cs.node[mono], cs.plus[mono], lam[mono])}
    spreads = {(int(a), int(b), int(c)): float(v) for a, b, c, v in
               zip(cs.node[cvx], cs.plus[cvx], cs.minus[cvx], lam[cvx])}
    return DualCertificate(m.grid, np.asarray(sources, dtype=int),
                           np.asarray(sinks, dtype=int), masses,
                           GridMeasure(m.grid, alpha),
                           degenerate=nactive > size,
                           transfers=transfers, spreads=spreads)


def _shuffle_dominates_zero(alpha, radius, tol):
    plus, minus = alpha.positive(), alpha.negative()
    if plus.total <= tol and minus.total <= tol:
        return True, 0.0
    if plus.total <= 0 or minus.total <= 0:
        return False, -max(plus.total, minus.total)
    if abs(plus.total - minus.total) > tol:
        return False, -abs(plus.total - minus.total)
    minus = minus * (plus.total / minus.total)
    res = convex_dominates(plus, minus, v=None, radius=radius, tol=tol,
                           mass_tol=max(tol, 1e-9))
    return res.dominates, res.value


def verify_certificate(u, cert, m, tol=None, radius=2):
    """
    Complementary-slackness checks of a (utility, certificate) pair

    Conditions
    ----------

    a. ``u`` lies in the discrete utility cone
    b. ``gamma_1 - gamma_2 = m + alpha`` node-wise and ``alpha >=_cvx 0``
    c. ``sum u (gamma_1 - gamma_2) = sum u m``
    d. ``u(x) - u(y) = |x - y|_1`` on every transport triple, within
       ``max(tol, 1e-3 h_max)``

    ``gamma_1 >=_cvx m_+`` is reported under ``info``

    Returns
    -------

    report: VerificationReport

    """
    tol = DEFAULT_TOLERANCES['certificate'] if tol is None else tol
    grid = m.grid
    conditions = {}

    cone = ConeSpec.utility(grid.ndim, radius=radius)
    check = is_in_cone(u, cone, tol=tol)
    zero = abs(u.flat[0])
    conditions['a_utility_feasible'] = {
        'passed': bool(check.ok and zero <= tol),
        'worst': float(max(check.worst, zero))}

    g1, g2 = cert.gamma_marginals()
    resid = np.abs((g1 - g2).flat - m.flat - cert.alpha.flat)
    shuffle_ok, shuffle_value = _shuffle_dominates_zero(
        cert.alpha, radius, max(tol * 1e-2, 1e-8))
    conditions['b_certificate_feasible'] = {
        'passed': bool(resid.max() <= tol and shuffle_ok and
                       np.all(cert.masses >= -tol)),
        'worst': float(resid.max()),
        'shuffle_lp_minimum': float(shuffle_value)}

    lhs = float(np.dot(u.flat, (g1 - g2).flat))
    rhs = m.integrate(u)
    conditions['c_integral_identity'] = {'passed': abs(lhs - rhs) <= tol,
                                         'worst': abs(lhs - rhs)}

    coords = grid.coords()
    tol_d = max(tol, 1e-3 * float(grid.spacing.max()))
    if cert.masses.size:
        dist = np.abs(coords[cert.sources] - coords[cert.sinks]).sum(axis=1)
        gaps = np.abs(u.flat[cert.sources] - u.flat[cert.sinks] - dist)
        gaps = gaps[cert.masses > tol * 1e-3]
        worst_d = float(gaps.max()) if gaps.size else 0.0
    else:
        worst_d = 0.0
    conditions['d_tight_transport'] = {'passed': worst_d <= tol_d,
                                       'worst': worst_d}

    info = {}
    mplus = m.positive()
    if g1.total > 0 and mplus.total > 0:
        scaled = mplus * (g1.total / mplus.total)
        res = convex_dominates(g1, scaled, radius=radius,
                               mass_tol=max(1e-9, tol))
        info['gamma1_dominates_mu_plus'] = res.dominates

    dual = cert.value
    primal = m.integrate(u)
    return VerificationReport(primal_value=primal, dual_value=dual,
                              gap=duality_gap(primal, dual),
                              conditions=conditions, info=info)


def feasible_certificate(m, transfers=(), spreads=()):
    """
    Feasible (not necessarily optimal) dual object

    Parameters
    ----------

    m: GridMeasure, required

    transfers: iterable of (lower_index, upper_index, mass), optional
        Upward moves of non-negative mass (multi-indices with
        ``upper >= lower`` componentwise)

    spreads: iterable of (centre_index, direction, mass), optional
        Mean-preserving spreads from ``centre`` to ``centre +/- direction``

    Returns
    -------

    certificate: DualCertificate
        ``gamma`` is the product coupling of the positive and negative
        parts of ``m + alpha``

    """
    grid = m.grid
    shape = grid.shape
    alpha = np.zeros(shape)
    for lower, upper, mass in transfers:
        lower, upper = np.asarray(lower), np.asarray(upper)
        if np.any(upper < lower) or mass < 0:
            msg = "Error: Transfers must move non-negative mass upwards"
            raise PreconditionError(msg)
        alpha[tuple(lower)] -= mass
        alpha[tuple(upper)] += mass
    for centre, direction, mass in spreads:
        centre, direction = np.asarray(centre), np.asarray(direction)
        if mass < 0:
            raise PreconditionError("Error: Spread masses must be >= 0")
        alpha[tuple(centre)] -= 2.0 * mass
        alpha[tuple(centre + direction)] += mass
        alpha[tuple(centre - direction)] += mass
    alpha = GridMeasure(grid, alpha)

    nu = (m + alpha).flat
    plus = np.clip(nu, 0.0, None)
    minus = np.clip(-nu, 0.0, None)
    src, dst = np.nonzero(plus)[0], np.nonzero(minus)[0]
    total = minus.sum()
    if src.size == 0 or dst.size == 0 or total == 0:
        empty = np.empty(0, dtype=int)
        return DualCertificate(grid, empty, empty, np.empty(0), alpha)
    pairs_s = np.repeat(src, dst.size)
    pairs_d = np.tile(dst, src.size)
    masses = plus[pairs_s] * minus[pairs_d] / total
    return DualCertificate(grid, pairs_s, pairs_d, masses, alpha)
