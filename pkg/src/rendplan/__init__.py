"""Rendezvous-plan optimization and grid-world execution for multi-robot exploration."""

__version__ = "0.1.0"
