"""Authenticated REST facade over a running node."""

from .app import create_app  # noqa: F401
from .auth import SessionStore  # noqa: F401
