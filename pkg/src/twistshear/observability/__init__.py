"""Observability - Logfire setup."""
