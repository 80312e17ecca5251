"""Sphinx configuration file for an LSST stack package.

This configuration only affects single-package Sphinx documentation builds.
"""

import lsst.ts.isofem  # noqa
from documenteer.conf.pipelinespkg import *  # type: ignore # noqa

project = "ts_isofem"
html_theme_options["logotext"] = project  # type: ignore # noqa
html_title = project
html_short_title = project
doxylink = {}  # Avoid warning: Could not find tag file _doxygen/doxygen.tag

intersphinx_mapping["numpy"] = ("https://numpy.org/doc/stable", None)  # type: ignore # noqa
intersphinx_mapping["scipy"] = ("https://docs.scipy.org/doc/scipy", None)  # type: ignore # noqa
