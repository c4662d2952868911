"""Mather measures of discretised Tonelli Lagrangians on the torus, by linear programming."""

__version__ = "0.1.0"
