"""Numerical engine for metric-affinor structures and their submanifolds."""

__version__ = "0.1.0"
