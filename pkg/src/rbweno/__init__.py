"""Stabilized CG/DG solvers with residual-based WENO shock capturing.

Subpackages cover uniform structured meshes, Lagrange bases, gradient
projection / fluctuation operators, WENO reconstruction with classical and
residual-based nonlinear weights, blended dissipation forms, hyperbolic
time-dependent solvers, and steady convection-diffusion-reaction solvers.
"""

from . import basis, cdr, hyperbolic, mesh, physics, projection, stabilization, weno

__all__ = [
    "basis",
    "cdr",
    "hyperbolic",
    "mesh",
    "physics",
    "projection",
    "stabilization",
    "weno",
]

__version__ = "0.1.0"
