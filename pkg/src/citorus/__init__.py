"""citorus: a pseudo-spectral convex-integration laboratory on the 3-torus."""

__version__ = "0.1.0"
