"""Spherical functions, Schatten estimates, Weyl-chamber decay certificates and
spectral analysis of SL(n, Z/qZ) Cayley graphs."""

from . import congruence_graphs, embedding, errors, gegenbauer, schatten, spectral, weyl_path
from .errors import *  # noqa: F401,F403

__version__ = "0.1.0"
