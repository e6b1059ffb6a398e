# -*- coding: utf-8 -*-
#
# Configuration file for the Sphinx documentation builder.
#
# This file does only contain a selection of the most common options. For a
# full list see the documentation:
# http://www.sphinx-doc.org/en/master/config

from pkg_resources import get_distribution


# -- Project information -----------------------------------------------------

project = 'psig-tools'
copyright = '2020, psig-tools developers'
author = 'psig-tools developers'

# The short X.Y version
version = ''
# The full version, including alpha/beta/rc tags
release = get_distribution('psig-tools').version


# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.doctest',
    'sphinx.ext.viewcode',
    'sphinx.ext.napoleon',
    'sphinx.ext.mathjax',
    'recommonmark',
]

templates_path = ['_templates']
source_suffix = ['.rst', '.md']
master_doc = 'index'
language = None
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']
pygments_style = 'sphinx'


# -- Options for HTML output -------------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_theme_options = {'navigation_depth': 4}
html_static_path = ['_static']
htmlhelp_basename = 'psig-toolsdoc'


# -- Options for manual page output ------------------------------------------

man_pages = [(master_doc, 'psig-tools', 'psig-tools Documentation', [author], 1)]
