"""HTTP review service over a bug store."""

from .app import ApiSession, create_app

__all__ = ["ApiSession", "create_app"]
