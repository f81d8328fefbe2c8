"""Exact assembly and certification of distributional Hessian and divdiv finite element complexes."""

__version__ = "0.1.0"
