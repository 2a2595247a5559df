"""Decoupling adversarial pipeline for sparse circuit detection in brain networks."""

__version__ = "0.1.0"
