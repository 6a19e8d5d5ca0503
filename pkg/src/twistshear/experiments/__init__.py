"""Experiment runners - one report builder per CLI subcommand."""
