"""Disordered nonlinear lattice dynamics in an absorbing box.

Thin package around the compiled extension; everything numerical lives in
`danse._core`.
"""

from danse._core import *  # noqa: F401,F403
from danse._core import __version__  # noqa: F401
