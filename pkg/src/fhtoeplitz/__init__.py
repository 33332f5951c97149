"""Spectra and eigenvectors of Fisher-Hartwig Toeplitz matrices."""
__version__ = "0.1.0"
