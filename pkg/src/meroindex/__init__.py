"""Meromorphic 3D-index of ideal triangulations and its asymptotics."""

__version__ = "0.1.0"
