"""Infer organisational hierarchy levels from email metadata."""

__version__ = "0.1.0"
