"""Wavelet coefficients from uniform Fourier samples by generalized sampling."""

__version__ = "0.1.0"
