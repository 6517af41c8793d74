# -*- coding: utf-8 -*-
#
# Sphinx configuration for the mdopt documentation.

import os
import sys
from codecs import open
import re
sys.path.insert(0, os.path.abspath('../..'))


# -- Project information -----------------------------------------------------

project = 'mdopt'
author = 'mdopt developers'
copyright = '2024-2026, mdopt developers'

with open('../../mdopt/__version__.py', 'r') as f:
    vf = f.read()
version = re.search(r"^_*version_* = ['\"]([^'\"]*)['\"]", vf, re.M).group(1)
release = version


# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
    'sphinx.ext.napoleon',
    'sphinx.ext.intersphinx',
]

intersphinx_mapping = {'python': ('https://docs.python.org/3', None),
                       'numpy': ('https://numpy.org/doc/stable', None),
                       'scipy': ('https://docs.scipy.org/doc/scipy', None)}

# Every module page is a bare automodule directive
autodoc_default_options = {'members': None}
autodoc_member_order = 'bysource'

# Docstrings use numpydoc sections
napoleon_numpy_docstring = True
napoleon_google_docstring = False
napoleon_use_param = False
napoleon_use_rtype = False

master_doc = 'index'
exclude_patterns = []
pygments_style = 'sphinx'
modindex_common_prefix = ['mdopt.']


# -- Options for HTML output -------------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_title = f"{project} documentation"
