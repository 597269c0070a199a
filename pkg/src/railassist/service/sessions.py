"""In-memory session store with TTL expiry.

Turns are serialized per session via the session's lock; distinct sessions
proceed concurrently. The abstract base is the persistence hook: a durable
backend only needs get_or_create/save/purge_expired.
"""

from __future__ import annotations

import abc
import threading
import time
import uuid
from dataclasses import dataclass, field

from ..dialog.model import DialogContext


@dataclass
class Session:
    session_id: str
    context: DialogContext
    created_at: float
    last_active_at: float
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def touch(self, now: float) -> None:
        self.last_active_at = now


class SessionStore(abc.ABC):
    @abc.abstractmethod
    def get_or_create(self, session_id: str | None) -> Session: ...

    @abc.abstractmethod
    def save(self, session: Session) -> None: ...

    @abc.abstractmethod
    def purge_expired(self) -> int: ...


class MemorySessionStore(SessionStore):
    def __init__(self, ttl_minutes: float = 30.0, clock=time.monotonic):
        self.ttl_seconds = ttl_minutes * 60.0
        self._clock = clock
        self._sessions: dict[str, Session] = {}
        self._mutex = threading.Lock()

    def get_or_create(self, session_id: str | None) -> Session:
        now = self._clock()
        with self._mutex:
            if session_id is not None:
                session = self._sessions.get(session_id)
                if session is not None and now - session.last_active_at <= self.ttl_seconds:
                    return session
            new_id = session_id or uuid.uuid4().hex
            session = Session(
                session_id=new_id,
                context=DialogContext(session_id=new_id),
                created_at=now,
                last_active_at=now,
            )
            self._sessions[new_id] = session
            return session

    def save(self, session: Session) -> None:
        session.touch(self._clock())

    def purge_expired(self) -> int:
        now = self._clock()
        with self._mutex:
            stale = [sid for sid, s in self._sessions.items() if now - s.last_active_at > self.ttl_seconds]
            for sid in stale:
                del self._sessions[sid]
            return len(stale)

    def __len__(self) -> int:
        return len(self._sessions)
