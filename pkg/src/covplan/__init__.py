"""Coverage path planning over rasterized polygonal regions."""

__version__ = "0.1.0"
