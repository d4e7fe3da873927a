"""Finite combinatorics workbench for norm-carrying creature parameters."""

__version__ = "0.1.0"
