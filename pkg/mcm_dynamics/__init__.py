"""
Minimal-complexity classifiers trained by integrating a projected primal-dual
dynamical system to equilibrium.
"""

__version__ = "0.1.0"
