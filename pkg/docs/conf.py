#!/usr/bin/env python
#
# boostlab documentation build configuration file.

import os
import sys

sys.path.insert(0, os.path.abspath("../src"))

import sphinx_rtd_theme  # noqa; F401 - install theme

import boostlab

extensions = ["sphinx.ext.autodoc", "sphinx.ext.viewcode", "sphinx.ext.mathjax", "sphinx_rtd_theme"]

templates_path = ["_templates"]
source_suffix = ".rst"
master_doc = "index"

project = "boostlab"
copyright = "2026, Boostlab developers"
author = boostlab.__author__

version = boostlab.__version__
release = boostlab.__version__

language = None
exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]
pygments_style = "sphinx"

autodoc_member_order = "bysource"

html_theme = "sphinx_rtd_theme"
html_static_path = []
htmlhelp_basename = "boostlabdoc"

man_pages = [(master_doc, "boostlab", "boostlab Documentation", [author], 1)]
