"""Multi-faceted entity set expansion from skip-gram context clustering."""

__version__ = "0.1.0"
