# -*- coding: utf-8 -*-

"""
mdopt
=====
Optimal selling mechanisms for a multi-item monopolist facing an additive
buyer: grid discretisations of the utility-maximisation problem, their
transport certificates, and the stochastic-dominance conditions that
certify menus, grand bundling and exclusion-set mechanisms.
Recommended usage::

    import mdopt as md

Available modules
-----------------
:mod:`~mechanisms`
    Menus, canonical partitions and the hypercube results; imported
    automatically.

:mod:`~distributions`
    Product type distributions on boxes.

:mod:`~regions`, :mod:`~quadrature`, :mod:`~measure`
    Regions of the type space, adaptive integration and the transformed
    measure.

:mod:`~lattice`, :mod:`~lp`, :mod:`~duality`, :mod:`~dominance`
    Grid measures and cones, the LP backends, primal/dual certificates and
    the dominance deciders.

:mod:`~instances`, :mod:`~render`
    Shipped worked examples, the golden runner and SVG output.

:mod:`~utils`
    Errors, logging and HDF5 output.

"""


# %% IMPORTS AND DECLARATIONS
# mdopt imports
from .__version__ import __version__
from . import (distributions, dominance, duality, instances, lattice, lp,
               measure, mechanisms, quadrature, regions, render, utils)
from .mechanisms import *

# All declaration
__all__ = ['distributions', 'dominance', 'duality', 'instances', 'lattice',
           'lp', 'measure', 'mechanisms', 'quadrature', 'regions', 'render',
           'utils']
__all__.extend(mechanisms.__all__)

# Author declaration
__author__ = "mdopt developers"
