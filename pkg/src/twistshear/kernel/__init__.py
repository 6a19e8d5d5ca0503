"""2x2 matrix and polar-frame kernel."""
