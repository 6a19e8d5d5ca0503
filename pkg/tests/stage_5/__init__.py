"""Stage 5: Report, CLI and determinism tests."""
