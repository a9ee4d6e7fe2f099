"""Simulation and dispatch optimisation for a grid of solar high-altitude platforms linked by wireless power beams."""

__version__ = "0.1.0"
