#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# npu_gemm_workbench documentation build configuration file.

import sys
import os

# the project root goes first on the path so the source package is
# documented, not an installed copy
cwd = os.getcwd()
project_root = os.path.dirname(cwd)
sys.path.insert(0, project_root)

import npu_gemm_workbench

extensions = ['sphinx.ext.autodoc',
              'sphinx.ext.viewcode',
              'sphinx.ext.mathjax']

templates_path = []
source_suffix = '.rst'
master_doc = 'index'

project = u'npu gemm workbench'
copyright = u"2026, npu gemm workbench developers"

version = npu_gemm_workbench.__version__
release = npu_gemm_workbench.__version__

exclude_patterns = ['_build']
pygments_style = 'sphinx'

html_theme = 'alabaster'
html_show_copyright = False
htmlhelp_basename = 'npu_gemm_workbenchdoc'

latex_documents = [
    ('index', 'npu_gemm_workbench.tex',
     u'npu gemm workbench Documentation',
     u'npu gemm workbench developers', 'manual'),
]

man_pages = [
    ('index', 'npu_gemm_workbench',
     u'npu gemm workbench Documentation',
     [u'npu gemm workbench developers'], 1)
]


def run_apidoc(_):
    from sphinx.ext.apidoc import main
    cur_dir = os.path.abspath(os.path.dirname(__file__))
    module = os.path.join(cur_dir, "..", "npu_gemm_workbench")
    main(['-e', '-o', cur_dir, module, '--force'])


def setup(app):
    app.connect('builder-inited', run_apidoc)
