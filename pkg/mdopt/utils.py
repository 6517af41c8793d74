# -*- coding: utf-8 -*-

"""
General Utilities
==================
Provides the exception hierarchy, logging set-up, default tolerances and a
few I/O helpers shared by all **mdopt** modules.
"""

__author__ = "mdopt developers"
__all__ = ["DomainError", "SingularityError", "AccuracyError",
           "RootNotBracketedError", "PreconditionError",
           "InvalidExclusionSetError", "UnsupportedDimensionError",
           "SolverError", "SchemaError", "DEFAULT_TOLERANCES",
           "get_logger", "timed", "round_significant", "as_points",
           "write_arrays_h5", ]

import logging
import os
import time
from contextlib import contextmanager

import numpy as np


class DomainError(ValueError):
    """A point lies outside the domain of a density or a map"""


class SingularityError(ArithmeticError):
    """A density vanishes where its reciprocal is needed"""


class AccuracyError(ArithmeticError):
    """Adaptive quadrature could not reach the requested accuracy"""


class RootNotBracketedError(ValueError):
    """No sign change of the target function inside the bracket"""


class PreconditionError(ValueError):
    """Inputs violate an operation's precondition"""


class InvalidExclusionSetError(ValueError):
    """An exclusion set induces allocations outside [0, 1]"""


class UnsupportedDimensionError(ValueError):
    """The operation is not defined for this number of items"""


class SolverError(RuntimeError):
    """The LP backend did not return an optimal solution"""

    def __init__(self, msg, status=None):
        super().__init__(msg)
        self.status = status


class SchemaError(ValueError):
    """A JSON input does not follow the documented schema"""


DEFAULT_TOLERANCES = {'cone': 1e-7,
                      'dominance': 1e-8,
                      'mass': 1e-6,
                      'certificate': 1e-6,
                      'regionthm': 1e-9, }

_LOG_LEVELS = {'debug': logging.DEBUG,
               'info': logging.INFO,
               'warning': logging.WARNING,
               'error': logging.ERROR, }


def _level_from_env(value):
    if value is None or value == '':
        return logging.WARNING
    value = value.strip().lower()
    if value in _LOG_LEVELS:
        return _LOG_LEVELS[value]
    try:
        return int(value)
    except ValueError:
        return logging.WARNING


def get_logger(name=None, level=None):
    """
    Returns a logger below the ``mdopt`` root logger. The root logger gets a
    single stderr handler on first use; its level comes from the
    ``MDOPT_LOG`` environment variable unless ``level`` is given.

    Parameters
    ----------

    name: string, optional, default: None
        Dotted module name, usually ``__name__``. ``None`` returns the
        package root logger

    level: integer, optional, default: None
        Overrides the level derived from ``MDOPT_LOG``

    Returns
    -------

    logger: instance of ``logging.Logger``

    """
    root = logging.getLogger('mdopt')
    if not getattr(root, '_mdopt_configured', False):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter('[%(name)s]: %(message)s'))
        root.addHandler(handler)
        root.setLevel(_level_from_env(os.environ.get('MDOPT_LOG')))
        root.propagate = False
        root._mdopt_configured = True

    if level is not None:
        root.setLevel(level)

    if name is None or name == 'mdopt':
        return root
    if not name.startswith('mdopt'):
        name = f"mdopt.{name}"
    return logging.getLogger(name)


@contextmanager
def timed(logger, what, level=logging.INFO):
    """
    Logs ``"<what>..."`` on entry and ``"<what>...done. Time taken = X
    seconds"`` on exit
    """
    t0 = time.perf_counter()
    logger.log(level, f"{what}...")
    yield
    t1 = time.perf_counter()
    logger.log(level, f"{what}...done. Time taken = {t1-t0:0.2f} seconds")


def round_significant(value, digits=12):
    """
    Rounds floats (also inside lists/dicts) to ``digits`` significant
    digits. Used for the human-readable reports only.
    """
    if isinstance(value, dict):
        return {k: round_significant(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_significant(v, digits) for v in value]
    if isinstance(value, np.ndarray):
        return round_significant(value.tolist(), digits)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if value == 0.0 or not np.isfinite(value):
            return value
        return float(f"{value:.{digits}g}")
    if isinstance(value, np.integer):
        return int(value)
    return value


def as_points(points, ndim):
    """
    Returns ``points`` as a 2-d float array of shape (npoints, ndim).
    A single point is accepted as a 1-d sequence.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        if ndim == 1:
            pts = pts.reshape(-1, 1)
        else:
            pts = pts.reshape(1, -1)
    if pts.shape[1] != ndim:
        msg = f"Error: Expected points with {ndim} coordinates but got "\
              f"an array of shape {pts.shape}"
        raise ValueError(msg)
    return pts


def write_arrays_h5(fname, arrays, attrs=None, group='/'):
    """
    Writes a set of named numpy arrays (and scalar attributes) into an
    hdf5 file

    Parameters
    ----------

    fname: string, required
        Output filename. Any existing file is truncated

    arrays: dictionary, required
        Maps dataset names to array-like values

    attrs: dictionary, optional, default: None
        Scalar or string attributes attached to ``group``

    group: string, optional, default: '/'
        Group that receives the datasets

    Returns
    -------

        Returns ``True`` on successful completion of the write

    """
    import h5py

    with h5py.File(fname, 'w') as hf:
        grp = hf.require_group(group)
        if attrs:
            for key, val in attrs.items():
                grp.attrs[key] = val
        for name, values in arrays.items():
            grp.create_dataset(name, data=np.asarray(values))

    return True
