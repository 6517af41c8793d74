# -*- coding: utf-8 -*-

"""
Lattice
=======
Rectangular grids over the type box, signed node masses, node-valued
functions, and the linear constraint systems that describe the discrete
utility cones (directionally monotone, convex along lattice directions,
1-Lipschitz per axis).
"""

__author__ = "mdopt developers"
__all__ = ["GridSpec", "GridMeasure", "GridFunction", "ConeSpec",
           "ConstraintSet", "ConeCheck", "stencil_directions",
           "cone_constraints", "is_in_cone", "discretize_measure",
           "deposit_points", ]

import itertools
import logging
from collections import namedtuple
from dataclasses import dataclass, field
from math import gcd

import numpy as np
import pandas as pd
import scipy.sparse as sp
from tqdm import tqdm

from .distributions import Box
from .measure import SeparableTerm, evaluate_terms
from .quadrature import gauss_legendre, integrate_region
from .regions import BoxRegion, EmptyRegion, GridMaskRegion
from .utils import (PreconditionError, SchemaError, get_logger, timed,
                    write_arrays_h5)

logger = get_logger(__name__)


class GridSpec(object):
    """
    Uniform lattice with ``nodes[i]`` points along axis ``i`` (both box
    ends included)
    """

    def __init__(self, box, nodes):
        if not isinstance(box, Box):
            box = Box(*box)
        nodes = np.atleast_1d(np.asarray(nodes, dtype=int))
        if nodes.size == 1 and box.ndim > 1:
            nodes = np.repeat(nodes, box.ndim)
        if nodes.size != box.ndim or np.any(nodes < 2):
            msg = f"Error: Need at least two nodes along each of the "\
                  f"{box.ndim} axes. Got nodes = {nodes.tolist()}"
            raise ValueError(msg)
        self.box = box
        self.nodes = tuple(int(k) for k in nodes)

    @property
    def ndim(self):
        return self.box.ndim

    @property
    def shape(self):
        return self.nodes

    @property
    def size(self):
        return int(np.prod(self.nodes))

    @property
    def spacing(self):
        return self.box.widths / (np.asarray(self.nodes) - 1)

    @property
    def axes(self):
        return [np.linspace(lo, hi, k) for lo, hi, k in
                zip(self.box.lows, self.box.highs, self.nodes)]

    def coords(self):
        """Node coordinates, shape (size, ndim), C order"""
        mesh = np.meshgrid(*self.axes, indexing='ij')
        return np.stack([m.ravel() for m in mesh], axis=1)

    def nearest_index(self, points):
        """
        Multi-index of the nearest node; ties go to the lower index
        """
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        idx = np.ceil((pts - self.box.lows) / self.spacing - 0.5)
        idx = np.clip(idx, 0, np.asarray(self.nodes) - 1).astype(int)
        return idx

    def refine(self, factor):
        """Grid with every cell split ``factor`` times along each axis"""
        factor = int(factor)
        if factor < 1:
            raise ValueError(f"Error: factor must be >= 1. Got {factor}")
        return GridSpec(self.box, [(k - 1) * factor + 1 for k in self.nodes])

    def mask_region(self, mask):
        return GridMaskRegion(self.box.lows, self.spacing, mask)

    def __eq__(self, other):
        return isinstance(other, GridSpec) and self.box == other.box and \
            self.nodes == other.nodes

    def __hash__(self):
        return hash((self.box, self.nodes))

    def __repr__(self):
        return f"GridSpec(box={self.box}, nodes={list(self.nodes)})"

    def to_dict(self):
        return {'box': self.box.to_dict(), 'nodes': list(self.nodes)}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(Box.from_dict(d['box']), d['nodes'])
        except (KeyError, TypeError, ValueError) as err:
            msg = f"Error: Invalid grid specification {d}: {err}"
            raise SchemaError(msg) from err


class _NodeArray(object):
    """Shared plumbing of node-valued arrays"""
    _field = None

    def __init__(self, grid, values):
        values = np.asarray(values, dtype=np.float64)
        if values.size != grid.size:
            msg = f"Error: Expected {grid.size} node values for {grid}; "\
                  f"got an array of shape {values.shape}"
            raise ValueError(msg)
        self.grid = grid
        setattr(self, self._field, values.reshape(grid.shape).copy())

    @property
    def values(self):
        return getattr(self, self._field)

    @property
    def flat(self):
        return self.values.ravel()

    def _check_grid(self, other):
        if other.grid != self.grid:
            raise ValueError("Error: Node arrays live on different grids")

    def to_dict(self):
        return {'grid': self.grid.to_dict(), self._field: self.values.tolist()}

    @classmethod
    def from_dict(cls, d):
        try:
            grid = GridSpec.from_dict(d['grid'])
            return cls(grid, d[cls._field])
        except (KeyError, TypeError, ValueError) as err:
            if isinstance(err, SchemaError):
                raise
            msg = f"Error: Invalid {cls.__name__} JSON: {err}"
            raise SchemaError(msg) from err

    def write_h5(self, fname):
        attrs = {'kind': self.__class__.__name__,
                 'nodes': np.asarray(self.grid.nodes)}
        return write_arrays_h5(fname, {self._field: self.values,
                                       'lows': self.grid.box.lows,
                                       'highs': self.grid.box.highs},
                               attrs=attrs)


class GridMeasure(_NodeArray):
    """Signed mass per lattice node"""
    _field = 'mass'

    @property
    def total(self):
        return float(self.mass.sum())

    def positive(self):
        return GridMeasure(self.grid, np.maximum(self.mass, 0.0))

    def negative(self):
        """The negative part as a non-negative measure"""
        return GridMeasure(self.grid, np.maximum(-self.mass, 0.0))

    def support(self, tol=0.0):
        return np.abs(self.mass) > tol

    def restrict_to_support(self, tol=0.0):
        """Coordinates and masses of the nodes with non-zero mass"""
        mask = self.support(tol).ravel()
        return self.grid.coords()[mask], self.flat[mask]

    def integrate(self, u):
        """``sum_x u(x) m(x)`` for a GridFunction or a node array"""
        values = u.values if isinstance(u, GridFunction) else np.asarray(u)
        return float(np.sum(values.reshape(self.grid.shape) * self.mass))

    def __add__(self, other):
        self._check_grid(other)
        return GridMeasure(self.grid, self.mass + other.mass)

    def __sub__(self, other):
        self._check_grid(other)
        return GridMeasure(self.grid, self.mass - other.mass)

    def __neg__(self):
        return GridMeasure(self.grid, -self.mass)

    def __mul__(self, scalar):
        return GridMeasure(self.grid, float(scalar) * self.mass)

    __rmul__ = __mul__

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def point_masses(cls, grid, points, masses):
        """Masses snapped to the nearest nodes"""
        out = np.zeros(grid.shape)
        for idx, m in zip(grid.nearest_index(points), np.atleast_1d(masses)):
            out[tuple(idx)] += m
        return cls(grid, out)


class GridFunction(_NodeArray):
    """Real value per lattice node"""
    _field = 'value'

    @classmethod
    def from_callable(cls, grid, func):
        """Samples a vectorised ``func(points)`` at every node"""
        return cls(grid, np.asarray(func(grid.coords()), dtype=np.float64))

    def at(self, index):
        return float(self.value[tuple(index)])


@dataclass(frozen=True)
class ConeSpec:
    """
    Discrete utility cone

    Parameters
    ----------

    direction: tuple of {-1, 0, +1}
        Monotonicity sign per axis; 0 means no monotonicity rows

    radius: integer, optional, default: 2
        Convexity stencil: primitive lattice directions ``d`` with
        ``max|d_i| <= radius``

    lipschitz: boolean, optional, default: False
        Adds per-axis slope bounds of 1

    """
    direction: tuple
    radius: int = 2
    lipschitz: bool = False

    def __post_init__(self):
        direction = tuple(int(v) for v in np.atleast_1d(self.direction))
        if any(v not in (-1, 0, 1) for v in direction):
            msg = f"Error: Direction entries must be -1, 0 or +1. Got "\
                  f"{direction}"
            raise ValueError(msg)
        if int(self.radius) < 1:
            msg = f"Error: Stencil radius must be >= 1. Got {self.radius}"
            raise ValueError(msg)
        object.__setattr__(self, 'direction', direction)
        object.__setattr__(self, 'radius', int(self.radius))

    @classmethod
    def utility(cls, ndim, radius=2):
        """Monotone, convex and 1-Lipschitz: the feasible utilities"""
        return cls((1, ) * ndim, radius=radius, lipschitz=True)


def stencil_directions(ndim, radius):
    """
    Primitive integer vectors with ``max|d_i| <= radius``, one per
    +/- pair (first non-zero entry positive)
    """
    out = []
    for d in itertools.product(range(-radius, radius + 1), repeat=ndim):
        d = np.array(d)
        nz = np.nonzero(d)[0]
        if nz.size == 0 or d[nz[0]] < 0:
            continue
        g = 0
        for v in d:
            g = gcd(g, int(abs(v)))
        if g != 1:
            continue
        out.append(tuple(int(v) for v in d))
    return out


# Row kind codes
MONOTONE, CONVEX, LIPSCHITZ = 0, 1, 2
KIND_NAMES = {MONOTONE: 'monotone', CONVEX: 'convex', LIPSCHITZ: 'lipschitz'}


@dataclass
class ConstraintSet:
    """
    Rows ``A u <= b`` over the flattened node values

    ``node``/``plus``/``minus`` hold flat node indices per row: for
    monotone and Lipschitz rows the lower and upper end of the axis step
    (``minus = -1``); for convex rows the centre and ``centre +/- d``
    """
    grid: GridSpec
    cone: ConeSpec
    A: sp.csr_matrix
    b: np.ndarray
    kind: np.ndarray
    node: np.ndarray
    plus: np.ndarray
    minus: np.ndarray
    axis: np.ndarray = field(default=None)

    @property
    def nrows(self):
        return self.A.shape[0]

    def count(self, kind):
        return int(np.sum(self.kind == kind))

    def residual(self, u):
        """``A u - b``; positive entries are violations"""
        values = u.flat if isinstance(u, GridFunction) else \
            np.asarray(u).ravel()
        return self.A @ values - self.b

    def to_frame(self):
        """Sparse triplets with one line per non-zero coefficient"""
        coo = self.A.tocoo()
        return pd.DataFrame({'row': coo.row,
                             'col': coo.col,
                             'coeff': coo.data,
                             'sense': '<=',
                             'rhs': self.b[coo.row],
                             'kind': [KIND_NAMES[k] for k in
                                      self.kind[coo.row]]})

    def write_triplets(self, fname):
        """Writes the triplets as whitespace separated text"""
        frame = self.to_frame()
        frame.to_csv(fname, sep=' ', index=False,
                     columns=['row', 'col', 'coeff', 'sense', 'rhs'])
        return True


def _axis_step_pairs(index, axis):
    lower = [slice(None)] * index.ndim
    upper = [slice(None)] * index.ndim
    lower[axis] = slice(0, index.shape[axis] - 1)
    upper[axis] = slice(1, index.shape[axis])
    return index[tuple(lower)].ravel(), index[tuple(upper)].ravel()


def _stencil_triples(index, d):
    centre, plus, minus = [], [], []
    for k, dk in enumerate(d):
        n = index.shape[k]
        a = abs(dk)
        if 2 * a >= n:
            return (np.empty(0, dtype=int), ) * 3
        centre.append(slice(a, n - a))
        plus.append(slice(a + dk, n - a + dk))
        minus.append(slice(a - dk, n - a - dk))
    return (index[tuple(centre)].ravel(), index[tuple(plus)].ravel(),
            index[tuple(minus)].ravel())


def cone_constraints(grid, cone):
    """
    Linear rows describing the discrete cone ``cone`` on ``grid``

    Returns
    -------

    constraints: ConstraintSet
        Monotone rows ``u(x) - u(x + h e_i) <= 0`` (reversed for
        ``v_i = -1``), convex rows ``2u(x) - u(x+d) - u(x-d) <= 0`` and
        Lipschitz rows ``u(x + h e_i) - u(x) <= h_i`` (plus the mirrored
        rows on axes that are not non-decreasing)

    """
    if len(cone.direction) != grid.ndim:
        msg = f"Error: Cone direction {cone.direction} does not match the "\
              f"grid dimension {grid.ndim}"
        raise ValueError(msg)
    index = np.arange(grid.size).reshape(grid.shape)
    spacing = grid.spacing

    rows, cols, vals = [], [], []
    rhs, kinds, nodes, pluses, minuses, axes = [], [], [], [], [], []
    nrow = 0

    def add(block_cols, block_vals, b, kind, node, plus, minus, axis):
        nonlocal nrow
        count = node.size
        if count == 0:
            return
        r = np.arange(nrow, nrow + count)
        for c, v in zip(block_cols, block_vals):
            rows.append(r)
            cols.append(c)
            vals.append(np.full(count, v, dtype=np.float64))
        rhs.append(np.full(count, b, dtype=np.float64))
        kinds.append(np.full(count, kind, dtype=np.int8))
        nodes.append(node)
        pluses.append(plus)
        minuses.append(minus)
        axes.append(np.full(count, axis, dtype=int))
        nrow += count

    for i, v in enumerate(cone.direction):
        if v == 0:
            continue
        lower, upper = _axis_step_pairs(index, i)
        none = np.full(lower.size, -1)
        add([lower, upper], [v, -v], 0.0, MONOTONE, lower, upper, none, i)

    for j, d in enumerate(stencil_directions(grid.ndim, cone.radius)):
        centre, plus, minus = _stencil_triples(index, d)
        add([centre, plus, minus], [2.0, -1.0, -1.0], 0.0, CONVEX,
            centre, plus, minus, j)

    if cone.lipschitz:
        for i, v in enumerate(cone.direction):
            lower, upper = _axis_step_pairs(index, i)
            none = np.full(lower.size, -1)
            add([lower, upper], [-1.0, 1.0], spacing[i], LIPSCHITZ,
                lower, upper, none, i)
            if v != 1:
                add([lower, upper], [1.0, -1.0], spacing[i], LIPSCHITZ,
                    upper, lower, none, i)

    if nrow == 0:
        A = sp.csr_matrix((0, grid.size))
        empty = np.empty(0, dtype=int)
        return ConstraintSet(grid, cone, A, np.empty(0),
                             np.empty(0, dtype=np.int8), empty, empty,
                             empty, empty)

    A = sp.csr_matrix((np.concatenate(vals),
                       (np.concatenate(rows), np.concatenate(cols))),
                      shape=(nrow, grid.size))
    return ConstraintSet(grid, cone, A, np.concatenate(rhs),
                         np.concatenate(kinds), np.concatenate(nodes),
                         np.concatenate(pluses), np.concatenate(minuses),
                         np.concatenate(axes))


ConeCheck = namedtuple('ConeCheck', ['ok', 'worst', 'violations'])


def is_in_cone(u, cone, tol=1e-7, constraints=None):
    """
    Checks every row of ``cone_constraints(u.grid, cone)``

    Returns
    -------

    check: ConeCheck
        ``ok``, the worst violation (0 when none) and a list of
        ``{'kind', 'node', 'plus', 'minus', 'amount'}`` entries for the
        violated rows

    """
    if constraints is None:
        constraints = cone_constraints(u.grid, cone)
    res = constraints.residual(u)
    bad = np.nonzero(res > tol)[0]
    violations = [{'kind': KIND_NAMES[int(constraints.kind[r])],
                   'node': int(constraints.node[r]),
                   'plus': int(constraints.plus[r]),
                   'minus': int(constraints.minus[r]),
                   'amount': float(res[r])} for r in bad]
    worst = float(max(res.max(), 0.0)) if res.size else 0.0
    return ConeCheck(bad.size == 0, worst, violations)


# ---------------------------------------------------------------------------
# Measure discretisation
# ---------------------------------------------------------------------------

_Pieces = namedtuple('_Pieces', ['edges', 'nodes', 'c', 'd', 'nnodes'])

_MATRIX_ORDER = 12
_SAMPLES = 3


def _axis_pieces(coords, scheme):
    """
    Integration pieces along one axis and the basis functions
    ``c + d x`` living on each piece
    """
    n = coords.size
    if scheme == 'linear':
        h = coords[1] - coords[0]
        count = n - 1
        left, right = np.arange(count), np.arange(1, n)
        nodes = np.column_stack([left, right])
        c = np.column_stack([coords[1:] / h, -coords[:-1] / h])
        d = np.column_stack([np.full(count, -1.0 / h),
                             np.full(count, 1.0 / h)])
        return _Pieces(coords.copy(), nodes, c, d, n)
    if scheme == 'voronoi':
        mids = 0.5 * (coords[1:] + coords[:-1])
        edges = np.concatenate([[coords[0]], mids, [coords[-1]]])
        return _Pieces(edges, np.arange(n)[:, None], np.ones((n, 1)),
                       np.zeros((n, 1)), n)
    msg = f"Error: scheme must be 'voronoi' or 'linear'. Got '{scheme}'"
    raise ValueError(msg)


def _axis_matrix(pieces, factor):
    """``M[node, piece] = int_piece factor(x) basis_node(x) dx``"""
    xg, wg = gauss_legendre(_MATRIX_ORDER)
    lo, hi = pieces.edges[:-1], pieces.edges[1:]
    half = 0.5 * (hi - lo)
    pts = (0.5 * (hi + lo))[:, None] + half[:, None] * xg[None, :]
    wts = half[:, None] * wg[None, :]
    g = 1.0 if factor is None else \
        np.asarray(factor(pts.ravel())).reshape(pts.shape)
    count = lo.size
    M = np.zeros((pieces.nnodes, count))
    for b in range(pieces.nodes.shape[1]):
        basis = pieces.c[:, b, None] + pieces.d[:, b, None] * pts
        np.add.at(M, (pieces.nodes[:, b], np.arange(count)),
                  np.sum(wts * g * basis, axis=1))
    return M


def _clip(values, part):
    if part == 'positive':
        return np.maximum(values, 0.0)
    if part == 'negative':
        return np.minimum(values, 0.0)
    return values


def _classify_cells(terms, part, region, pieces):
    """
    0 = no contribution, 1 = whole cell counts with the plain terms,
    2 = cut by the region boundary or by a sign change of the density
    """
    shape = tuple(p.edges.size - 1 for p in pieces)
    if region is None and part is None:
        return np.ones(shape, dtype=np.int8)

    xg, _ = gauss_legendre(_SAMPLES)
    samples = []
    for p in pieces:
        lo, hi = p.edges[:-1, None], p.edges[1:, None]
        inner = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xg[None, :]
        samples.append(np.hstack([lo, inner, hi]))
    per_axis = samples[0].shape[1]
    n = len(pieces)
    cells = np.indices(shape).reshape(n, -1).T
    offsets = np.indices((per_axis, ) * n).reshape(n, -1).T
    pts = np.empty((cells.shape[0], offsets.shape[0], n))
    for k in range(n):
        pts[:, :, k] = samples[k][cells[:, k][:, None], offsets[:, k][None, :]]
    flat = pts.reshape(-1, n)

    state = np.ones(cells.shape[0], dtype=np.int8)
    if region is not None:
        inside = np.asarray(region.contains(flat), dtype=bool)
        inside = inside.reshape(cells.shape[0], -1)
        state = np.where(inside.all(axis=1), 1,
                         np.where(inside.any(axis=1), 2, 0)).astype(np.int8)
    if part is not None:
        dens = evaluate_terms(terms, flat).reshape(cells.shape[0], -1)
        good = dens >= 0 if part == 'positive' else dens <= 0
        bad = dens <= 0 if part == 'positive' else dens >= 0
        sign = np.where(good.all(axis=1), 1,
                        np.where(bad.all(axis=1), 0, 2)).astype(np.int8)
        state = np.where((state == 0) | (sign == 0), 0,
                         np.where((state == 1) & (sign == 1), 1, 2))
    return state.reshape(shape).astype(np.int8)


def _contract(weights, matrices):
    out = weights
    for k, M in enumerate(matrices):
        out = np.moveaxis(np.tensordot(out, M, axes=([k], [1])), -1, k)
    return out


def _cut_cell(terms, part, region, pieces, cell, config):
    n = len(pieces)
    lo = np.array([pieces[k].edges[cell[k]] for k in range(n)])
    hi = np.array([pieces[k].edges[cell[k] + 1] for k in range(n)])
    nb = pieces[0].nodes.shape[1]
    cs = [pieces[k].c[cell[k]] for k in range(n)]
    ds = [pieces[k].d[cell[k]] for k in range(n)]
    combos = list(itertools.product(range(nb), repeat=n))
    domain = region if region is not None else BoxRegion(lo, hi)

    values = None
    constant = all(f is None for t in terms for f in t.factors)
    if constant:
        coef = sum(t.coef for t in terms)
        exact = []
        for combo in combos:
            factors = np.array([[cs[k][b], ds[k][b]]
                                for k, b in enumerate(combo)])
            val = domain.integrate_polynomial(lo, hi, factors)
            if val is None:
                break
            exact.append(coef * val)
        else:
            values = np.array(exact)

    if values is None:
        def integrand(p):
            dens = _clip(evaluate_terms(terms, p), part)
            basis = np.ones((p.shape[0], 1))
            for k in range(n):
                bk = cs[k][None, :] + ds[k][None, :] * p[:, k, None]
                basis = (basis[:, :, None] * bk[:, None, :]).reshape(
                    p.shape[0], -1)
            return dens[:, None] * basis

        values = integrate_region(integrand, domain, lo, hi, config=config,
                                  size=len(combos))

    targets = [tuple(pieces[k].nodes[cell[k], b] for k, b in enumerate(combo))
               for combo in combos]
    return targets, values


def _deposit_terms(terms, part, region, pieces, config=None,
                   show_progressbar=False):
    shape = tuple(p.nnodes for p in pieces)
    out = np.zeros(shape)
    if isinstance(region, EmptyRegion) or not terms:
        return out
    state = _classify_cells(terms, part, region, pieces)

    full = (state == 1).astype(np.float64)
    if full.any():
        for term in terms:
            matrices = [_axis_matrix(p, fac)
                        for p, fac in zip(pieces, term.factors)]
            out += term.coef * _contract(full, matrices)

    cut = np.argwhere(state == 2)
    for cell in tqdm(cut, disable=not show_progressbar,
                     desc='cut cells'):
        targets, values = _cut_cell(terms, part, region, pieces, cell,
                                    config)
        for target, val in zip(targets, np.atleast_1d(values)):
            out[target] += val
    return out


def deposit_points(grid, points, masses, scheme='voronoi'):
    """
    Node masses of point masses: nearest node (``'voronoi'``, ties to the
    lower index) or multilinear weights (``'linear'``)
    """
    out = np.zeros(grid.shape)
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    masses = np.atleast_1d(masses)
    if scheme == 'voronoi':
        for idx, m in zip(grid.nearest_index(points), masses):
            out[tuple(idx)] += m
        return out
    spacing = grid.spacing
    upper = np.asarray(grid.nodes) - 2
    for point, m in zip(points, masses):
        rel = (point - grid.box.lows) / spacing
        base = np.clip(np.floor(rel), 0, upper).astype(int)
        frac = np.clip(rel - base, 0.0, 1.0)
        for corner in itertools.product((0, 1), repeat=grid.ndim):
            corner = np.array(corner)
            w = np.prod(np.where(corner == 1, frac, 1.0 - frac))
            if w != 0:
                out[tuple(base + corner)] += m * w
    return out


def discretize_measure(mu, grid, scheme='voronoi', config=None,
                       show_progressbar=False):
    """
    Node masses of a transformed measure

    Parameters
    ----------

    mu: TransformedMeasure, required
        May carry a restriction and a sign part

    grid: GridSpec, required
        Must live on ``mu.box``

    scheme: string, optional, default: 'voronoi'
        ``'voronoi'`` gives every node the mass of its cell (atoms go to
        the nearest node). ``'linear'`` spreads mass with multilinear hat
        functions, which keeps first moments and turns upward moves and
        axis-aligned spreads into grid moves and spreads

    config: QuadratureConfig, optional, default: None
        Quadrature used on cells cut by the restriction or by a sign change

    show_progressbar: boolean, optional, default: False

    Returns
    -------

    measure: GridMeasure

    """
    if grid.box != mu.box:
        msg = f"Error: Grid box {grid.box} differs from the measure box "\
              f"{mu.box}"
        raise PreconditionError(msg)

    n = grid.ndim
    pieces = [_axis_pieces(ax, scheme) for ax in grid.axes]
    with timed(logger, f"Discretising measure on {list(grid.nodes)} nodes "
               f"({scheme})", level=logging.DEBUG):
        mass = _deposit_terms(mu.interior_terms, mu.part, mu.region, pieces,
                              config=config,
                              show_progressbar=show_progressbar)

        for facet in mu.active_facets():
            axis, value = facet.axis, facet.value
            if n == 1:
                point = np.array([[value]])
                if mu.region is None or mu.region.contains(point)[0]:
                    mass += deposit_points(grid, point, [facet.coef],
                                           scheme=scheme)
                continue
            sub_region = None if mu.region is None else \
                mu.region.section(axis, value)
            sub_pieces = [p for k, p in enumerate(pieces) if k != axis]
            term = SeparableTerm(facet.coef,
                                 tuple(f for k, f in enumerate(facet.factors)
                                       if k != axis))
            sub_mass = _deposit_terms([term], None, sub_region, sub_pieces,
                                      config=config)
            node = int(np.argmin(np.abs(grid.axes[axis] - value)))
            sl = [slice(None)] * n
            sl[axis] = node
            mass[tuple(sl)] += sub_mass

        atoms = mu.active_atoms()
        if atoms:
            mass += deposit_points(grid, [p for p, _ in atoms],
                                   [m for _, m in atoms], scheme=scheme)

    return GridMeasure(grid, mass)
