"""Bounds and exact simulation for dynamically decoupled quantum gates."""

__version__ = "0.1.0"
