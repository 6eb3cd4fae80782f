"""Heat-risk analytics: climate indices, news insight extraction, retrieval, and reporting."""

__version__ = "0.1.0"
