"""Simulation toolkit for heralded multi-photon state generation in linear optics."""

__version__ = "0.1.0"
