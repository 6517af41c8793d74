# -*- coding: utf-8 -*-

"""
Mechanisms
==========
Menus, exclusion-set mechanisms and the optimality checks built on them.

Recommended usage::

    import mdopt.mechanisms as mdmech

Available submodules
--------------------
:mod:`~menus`
    Finite menus, their regions and the optimal menu conditions

:mod:`~partitions`
    Two-item exclusion sets, canonical partitions and well-formedness

:mod:`~hypercube`
    Grand bundling for uniform hypercubes and the matching map

"""


# %% IMPORTS
# Module imports
from . import menus
from . import partitions
from . import hypercube

from .menus import *
from .partitions import *
from .hypercube import *


# All declaration
__all__ = []
__all__.extend(menus.__all__)
__all__.extend(partitions.__all__)
__all__.extend(hypercube.__all__)
