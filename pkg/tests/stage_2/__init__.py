"""Stage 2: Explicit twist tests."""
