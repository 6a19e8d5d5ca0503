"""Invariant reports, CSV/JSON emitters, SVG figures."""
