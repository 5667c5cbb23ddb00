"""geosent: spatio-temporal sentiment statistics from microblog archives."""

__version__ = "0.1.0"
