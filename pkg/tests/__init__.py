"""Twistshear test suite."""
