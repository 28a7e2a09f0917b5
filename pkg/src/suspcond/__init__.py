"""Effective conductivity of periodic suspensions of equal conducting spheres."""
__version__ = "0.1.0"
