# -*- coding: utf-8 -*-

"""
Linear Programming
==================
One entry point, :func:`solve_lp`, for the finite programs built by the
duality and dominance modules. Two backends:

* ``'highs'``: ``scipy.optimize.linprog(method='highs')``
* ``'simplex'``: a dense two-phase tableau simplex with Bland's rule. It is
  deterministic and reads exact duals off the final basis

Duals follow the ``linprog`` ``marginals`` convention: the derivative of
the optimal (minimised) objective with respect to each right-hand side.
"""

__author__ = "mdopt developers"
__all__ = ["LPResult", "solve_lp", "simplex", ]

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .utils import SolverError, get_logger

logger = get_logger(__name__)

_STATUS = {0: 'optimal', 1: 'iteration_limit', 2: 'infeasible',
           3: 'unbounded', 4: 'numerical'}

_DENSE_LIMIT = 40000


@dataclass
class LPResult:
    x: np.ndarray
    fun: float
    status: str
    message: str
    ineq_duals: np.ndarray
    eq_duals: np.ndarray
    nit: int
    backend: str


def _dense(A, ncols):
    if A is None:
        return np.zeros((0, ncols))
    if sp.issparse(A):
        return A.toarray().astype(np.float64)
    return np.atleast_2d(np.asarray(A, dtype=np.float64)).reshape(-1, ncols)


def _vector(b, nrows):
    if b is None:
        return np.zeros(nrows)
    return np.asarray(b, dtype=np.float64).ravel()


def _normalise_bounds(bounds, ncols):
    if bounds is None:
        return [(0.0, None)] * ncols
    if isinstance(bounds, tuple) and len(bounds) == 2 and \
       not isinstance(bounds[0], (tuple, list)):
        return [bounds] * ncols
    bounds = list(bounds)
    if len(bounds) != ncols:
        msg = f"Error: Got {len(bounds)} bounds for {ncols} variables"
        raise ValueError(msg)
    return bounds


def _nrows(A):
    if A is None:
        return 0
    return A.shape[0] if sp.issparse(A) else np.atleast_2d(A).shape[0]


def _finite(v):
    return v is not None and np.isfinite(v)


def _pivot(T, row, col):
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])


def _run(T, basis, ncols, max_iter, eps, nit):
    m = T.shape[0] - 1
    while True:
        reduced = T[-1, :ncols]
        cand = np.nonzero(reduced < -eps)[0]
        if cand.size == 0:
            return 'optimal', nit
        col = cand[0]
        column = T[:m, col]
        positive = column > eps
        if not positive.any():
            return 'unbounded', nit
        ratios = np.full(m, np.inf)
        ratios[positive] = T[:m, -1][positive] / column[positive]
        best = ratios.min()
        ties = np.nonzero(ratios <= best + eps * max(1.0, abs(best)))[0]
        row = ties[np.argmin(np.asarray(basis)[ties])]
        _pivot(T, row, col)
        basis[row] = col
        nit += 1
        if nit >= max_iter:
            return 'iteration_limit', nit


def simplex(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None,
            max_iter=50000, eps=1e-9):
    """
    Dense two-phase tableau simplex with Bland's rule

    Bounds are removed by substitution (shift by finite lower bounds, flip
    upper-bounded-only variables, split free variables; finite upper
    bounds become extra rows). Equality rows and rows with negative
    right-hand side get artificial variables.

    Returns
    -------

    result: LPResult

    Raises
    ------

    SolverError
        Infeasible, unbounded or iteration limit

    """
    c = np.asarray(c, dtype=np.float64).ravel()
    nvar = c.size
    Aub, Aeq = _dense(A_ub, nvar), _dense(A_eq, nvar)
    bub, beq = _vector(b_ub, Aub.shape[0]), _vector(b_eq, Aeq.shape[0])
    bounds = _normalise_bounds(bounds, nvar)

    # x = offset + S z, z >= 0
    cols, offset, extra_rows = [], np.zeros(nvar), []
    for j, (lb, ub) in enumerate(bounds):
        if _finite(lb):
            offset[j] = lb
            cols.append((j, 1.0))
            if _finite(ub):
                extra_rows.append((len(cols) - 1, ub - lb))
        elif _finite(ub):
            offset[j] = ub
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    nz = len(cols)
    S = np.zeros((nvar, nz))
    for k, (j, s) in enumerate(cols):
        S[j, k] = s

    rows_ub = Aub @ S
    rhs_ub = bub - Aub @ offset
    if extra_rows:
        ext = np.zeros((len(extra_rows), nz))
        for r, (k, val) in enumerate(extra_rows):
            ext[r, k] = 1.0
        rows_ub = np.vstack([rows_ub, ext])
        rhs_ub = np.concatenate([rhs_ub, [v for _, v in extra_rows]])
    rows_eq = Aeq @ S
    rhs_eq = beq - Aeq @ offset
    cz = S.T @ c

    mu, me = rows_ub.shape[0], rows_eq.shape[0]
    m = mu + me
    nstd = nz + mu
    A = np.zeros((m, nstd))
    A[:mu, :nz] = rows_ub
    A[:mu, nz:] = np.eye(mu)
    A[mu:, :nz] = rows_eq
    b = np.concatenate([rhs_ub, rhs_eq])
    sign = np.where(b < 0, -1.0, 1.0)
    A *= sign[:, None]
    b *= sign

    need_art = np.ones(m, dtype=bool)
    basis = [-1] * m
    for i in range(mu):
        if sign[i] > 0:
            need_art[i] = False
            basis[i] = nz + i
    art_rows = np.nonzero(need_art)[0]
    nart = art_rows.size

    T = np.zeros((m + 1, nstd + nart + 1))
    T[:m, :nstd] = A
    T[:m, -1] = b
    for k, i in enumerate(art_rows):
        T[i, nstd + k] = 1.0
        basis[i] = nstd + k

    nit = 0
    if nart:
        T[-1, :nstd] = -A[art_rows].sum(axis=0)
        T[-1, -1] = -b[art_rows].sum()
        status, nit = _run(T, basis, nstd + nart, max_iter, eps, nit)
        if status == 'iteration_limit':
            raise SolverError("Error: Simplex phase 1 hit the iteration "
                              "limit", status=1)
        if -T[-1, -1] > 1e-9:
            raise SolverError("Error: The linear program is infeasible",
                              status=2)
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] < nstd:
                continue
            row = T[i, :nstd]
            cand = np.nonzero(np.abs(row) > eps)[0]
            if cand.size:
                _pivot(T, i, cand[0])
                basis[i] = cand[0]
            else:
                keep[i] = False
        T = np.vstack([T[:m][keep], T[-1:]])
        T = np.delete(T, np.s_[nstd:nstd + nart], axis=1)
        basis = [bi for bi, k in zip(basis, keep) if k]
        kept_rows = np.nonzero(keep)[0]
    else:
        kept_rows = np.arange(m)

    cstd = np.concatenate([cz, np.zeros(mu)])
    cb = cstd[basis]
    T[-1, :nstd] = cstd - cb @ T[:-1, :nstd]
    T[-1, -1] = -cb @ T[:-1, -1]
    status, nit = _run(T, basis, nstd, max_iter, eps, nit)
    if status == 'unbounded':
        raise SolverError("Error: The linear program is unbounded",
                          status=3)
    if status == 'iteration_limit':
        raise SolverError("Error: Simplex phase 2 hit the iteration limit",
                          status=1)

    z = np.zeros(nstd)
    z[basis] = T[:-1, -1]
    x = offset + S @ z[:nz]

    Bmat = A[kept_rows][:, basis]
    try:
        y = np.linalg.solve(Bmat.T, cstd[basis])
    except np.linalg.LinAlgError:
        y = np.linalg.lstsq(Bmat.T, cstd[basis], rcond=None)[0]
    duals = np.zeros(m)
    duals[kept_rows] = y
    duals *= sign

    return LPResult(x=x, fun=float(c @ x), status='optimal',
                    message='Optimal solution found (dense simplex)',
                    ineq_duals=duals[:Aub.shape[0]], eq_duals=duals[mu:],
                    nit=nit, backend='simplex')


def _highs(c, A_ub, b_ub, A_eq, b_eq, bounds):
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=bounds, method='highs')
    if res.status != 0:
        msg = f"Error: HiGHS returned status {_STATUS.get(res.status)}: "\
              f"{res.message}"
        raise SolverError(msg, status=res.status)
    ineq = res.ineqlin.marginals if A_ub is not None else np.zeros(0)
    eq = res.eqlin.marginals if A_eq is not None else np.zeros(0)
    return LPResult(x=np.asarray(res.x), fun=float(res.fun),
                    status='optimal', message=res.message,
                    ineq_duals=np.asarray(ineq), eq_duals=np.asarray(eq),
                    nit=int(res.nit), backend='highs')


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None,
             method='auto'):
    """
    Minimises ``c . x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``
    and ``bounds``

    Parameters
    ----------

    c: array-like, required

    A_ub, b_ub, A_eq, b_eq: array-like or scipy.sparse, optional

    bounds: sequence of (low, high) or a single pair, optional,
        default: None
        ``None`` entries are infinite. ``None`` means ``x >= 0``

    method: string, optional, default: 'auto'
        ``'highs'``, ``'simplex'`` or ``'auto'`` (dense simplex when the
        tableau has at most 40000 entries, HiGHS otherwise)

    Returns
    -------

    result: LPResult

    """
    c = np.asarray(c, dtype=np.float64).ravel()
    if method not in ('auto', 'highs', 'simplex'):
        msg = f"Error: method must be 'auto', 'highs' or 'simplex'. "\
              f"Got '{method}'"
        raise ValueError(msg)
    if method == 'auto':
        nrows = _nrows(A_ub) + _nrows(A_eq)
        method = 'simplex' if nrows * (c.size + nrows) <= _DENSE_LIMIT \
            else 'highs'
    logger.debug(f"Solving LP with {c.size} variables using {method}")
    if method == 'simplex':
        return simplex(c, A_ub, b_ub, A_eq, b_eq, bounds)
    if bounds is None:
        bounds = (0, None)
    return _highs(c, A_ub, b_ub, A_eq, b_eq, bounds)
