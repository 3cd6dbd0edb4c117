"""FastAPI service wrapping the analytics engine."""

from .app import create_app

__all__ = ["create_app"]
