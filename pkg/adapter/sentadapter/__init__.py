"""sentadapter: fine-tune a transformer sentiment model and serve scores."""

__version__ = "0.1.0"
