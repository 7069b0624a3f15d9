"""Euler-Arnold equations on the circle's diffeomorphism group and the b-equation."""

__version__ = "0.1.0"
