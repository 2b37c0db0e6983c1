"""Lookup seam for external repositories of already-labeled news.

Public agencies and partner fact-checking outlets keep their own labeled
corpora; ``check-news`` consults this interface so a future federation can
surface their verdicts next to the platform's own. The default client
federates with nothing and reports no match.
"""

from __future__ import annotations

from typing import Optional, Protocol


class ExternalRepositories(Protocol):
    def lookup(self, news_id: str) -> Optional[dict]:
        """Return a match record for ``news_id``, or None when unknown."""
        ...


class NoExternalRepositories:
    """Null federation: every lookup misses."""

    def lookup(self, news_id: str) -> Optional[dict]:
        return None
