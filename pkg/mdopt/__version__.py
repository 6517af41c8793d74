# -*- coding: utf-8 -*-

"""
mdopt version
=============
Stores the different versions of the *mdopt* package.

"""


# %% VERSIONS
# Default/Latest/Current version
__version__ = '0.1.0'
