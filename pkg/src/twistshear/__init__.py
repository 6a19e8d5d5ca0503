"""Twistshear - twist and shear equilibria of planar nonlinear elasticity."""

__version__ = "0.3.0"
