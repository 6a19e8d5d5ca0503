"""Stage 1: Kernel and numerics tests."""
