"""Morse geodesics, hyperbolicity and contraction on finite metric graphs."""
__version__ = "0.1.0"
