"""Twist maps on an annulus - explicit and penalized."""
