"""Shear maps on the square - obstacle and mixed-boundary problems."""
