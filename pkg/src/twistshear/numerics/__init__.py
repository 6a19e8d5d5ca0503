"""Shared numerical engines - quadrature, roots, ODEs, CG, Newton."""
