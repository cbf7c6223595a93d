"""Dynamic island model GA with spectral-clustering migration."""

__version__ = "0.1.0"
