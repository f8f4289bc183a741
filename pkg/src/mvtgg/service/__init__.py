"""HTTP service around :mod:`mvtgg.api`."""

from .app import create_app

__all__ = ["create_app"]
