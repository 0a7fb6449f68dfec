"""Bifurcation kernels and small-amplitude trimodal steady water waves."""

__version__ = "0.1.0"
