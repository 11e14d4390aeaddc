"""Tabletop workcell simulator with a live trigger-action rule engine."""

__version__ = "0.1.0"
