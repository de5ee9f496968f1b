# Configuration file for the Sphinx documentation builder.
#
# For the full list of built-in configuration values, see the documentation:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# -- Project information -----------------------------------------------------

import os
import sys
sys.path.insert(0, os.path.abspath('../../'))
package_path = os.path.abspath('../..')
os.environ['PYTHONPATH'] = ':'.join((package_path, os.environ.get('PYTHONPATH', '')))

project = 'spdcPETSc'
copyright = '2026, spdcPETSc developers'
author = 'spdcPETSc developers'
release = '0.1.0'

# -- General configuration ---------------------------------------------------

extensions = ['sphinx.ext.autodoc', 'sphinx_autodoc_typehints', "sphinx.ext.mathjax",
              "sphinx.ext.todo"]

templates_path = ['_templates']
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']

# petsc4py and mpi4py need an MPI runtime, mock them when building the API pages
autodoc_mock_imports = ['petsc4py', 'mpi4py']

# -- Options for HTML output -------------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_static_path = ['../_static']
