"""Bearer-token sessions.

Tokens are random 128-bit hex strings held in memory only; they are never
written to the ledger or any log. Sessions expire after a configurable TTL
and are re-validated against the current checker record on every request,
so deactivation takes effect immediately.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass


@dataclass(frozen=True)
class Session:
    token: str
    checker_id: str
    role: str
    expires_at: float


class SessionStore:
    def __init__(self, ttl_hours: float = 8.0) -> None:
        self._ttl_s = ttl_hours * 3600.0
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def issue(self, checker_id: str, role: str) -> Session:
        token = secrets.token_hex(16)
        session = Session(token, checker_id, role, time.time() + self._ttl_s)
        with self._lock:
            self._sessions[token] = session
        return session

    def resolve(self, token: str) -> Session | None:
        with self._lock:
            session = self._sessions.get(token)
            if session is None:
                return None
            if session.expires_at < time.time():
                del self._sessions[token]
                return None
            return session

    def revoke(self, token: str) -> None:
        with self._lock:
            self._sessions.pop(token, None)
