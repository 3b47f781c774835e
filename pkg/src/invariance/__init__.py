"""Numerical verification of form-invariance (covariance) versus
frame-indifference (objectivity) for tensor fields, particle mechanics
and incompressible Navier-Stokes symmetries."""

__version__ = "0.1.0"
