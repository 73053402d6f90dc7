"""Exact branch-summing simulation of sequential quantum error correction."""

__version__ = "0.1.0"
