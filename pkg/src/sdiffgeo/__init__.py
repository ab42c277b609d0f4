"""Curvature of area-preserving diffeomorphism groups on tori and the sphere,
with a pseudo-spectral Euler solver on T^2."""

__version__ = "0.1.0"
