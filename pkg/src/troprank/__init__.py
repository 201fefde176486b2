"""Exact checks of tropical independence for multiplication maps on chains
of loops."""

__version__ = "0.1.0"
