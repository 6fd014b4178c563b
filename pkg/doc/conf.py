# -*- coding: utf-8 -*-
#
# autoformal documentation build configuration file.

import sys
import os

sys.path.insert(0, os.path.abspath('..'))

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.doctest']

templates_path = ['_templates']
source_suffix = '.txt'
master_doc = 'index'

project = 'autoformal'
authors = 'autoformal authors and contributors'
copyright = '2026 ' + authors

version = '0.1'
release = '0.1dev'

exclude_trees = ['_build']
add_function_parentheses = True
pygments_style = 'sphinx'

html_theme = 'sphinxdoc'
htmlhelp_basename = 'autoformaldoc'

latex_documents = [
    ('index', 'autoformal.tex', 'autoformal Documentation', authors, 'manual'),
]
