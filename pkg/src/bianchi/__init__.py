"""Exterior calculus for linear connections, verified numerically.

The package builds symbolic charts, differential forms and connections,
derives torsion/curvature structure forms, and checks the classical
structure equations and Bianchi identities (in intrinsic, Cartan and
exterior-covariant formulations) on a gallery of concrete geometries.
"""

__version__ = "0.1.0"
