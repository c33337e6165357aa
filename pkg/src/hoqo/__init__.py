"""hoqo: higher-order quantum operations as labeled Choi matrices."""

__version__ = "0.1.0"
