"""Executable protein/membrane calculus: parsing, typing, reactions, kappa bridge."""

__version__ = "0.1.0"
