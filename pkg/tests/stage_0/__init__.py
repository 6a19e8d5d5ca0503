"""Stage 0: Configuration and observability tests."""
