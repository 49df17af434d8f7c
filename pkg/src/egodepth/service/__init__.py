"""HTTP service wrapping the label-generation package."""

from .app import app

__all__ = ["app"]
