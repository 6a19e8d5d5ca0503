"""Stage 4: Shear map tests."""
