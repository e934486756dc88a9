"""Power relations in a search-and-matching growth model."""

__version__ = "0.1.0"
