"""Stage 3: Penalized twist tests."""
