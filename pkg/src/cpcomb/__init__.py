"""Weighted cut-and-project Dirac combs: autocorrelation and pure point diffraction."""

__version__ = "0.1.0"
