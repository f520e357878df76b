"""Oracle-call and gate accounting.

Two kinds of tallies exist. A process-wide :data:`GLOBAL` tally is guarded
by a lock so concurrent trials never lose increments. On top of that,
:func:`track` opens a context-local tally so a single solve can report its
own costs even while other threads are counting.
"""

from __future__ import annotations

import contextlib
import contextvars
import threading
from collections import Counter

__all__ = ["Tally", "GLOBAL", "record", "track"]

TA = "ta_calls"
TB = "tb_calls"
GATES = "gates"


class Tally:
    """Thread-safe bag of named integer counters."""

    def __init__(self):
        self._lock = threading.Lock()
        self._counts: Counter[str] = Counter()

    def add(self, name: str, amount: int = 1) -> None:
        with self._lock:
            self._counts[name] += amount

    def merge(self, other: "Tally") -> None:
        for name, value in other.snapshot().items():
            self.add(name, value)

    def __getitem__(self, name: str) -> int:
        with self._lock:
            return self._counts[name]

    def snapshot(self) -> dict[str, int]:
        with self._lock:
            return dict(self._counts)

    def reset(self) -> None:
        with self._lock:
            self._counts.clear()

    def __repr__(self):
        return f"Tally({self.snapshot()})"


GLOBAL = Tally()

_active: contextvars.ContextVar[tuple[Tally, ...]] = contextvars.ContextVar(
    "qlinsys_active_tallies", default=()
)


def record(name: str, amount: int = 1) -> None:
    GLOBAL.add(name, amount)
    for tally in _active.get():
        tally.add(name, amount)


@contextlib.contextmanager
def track():
    """Collect counts incurred inside the ``with`` block.

    >>> with track() as t:
    ...     record("ta_calls", 3)
    >>> t["ta_calls"]
    3
    """
    tally = Tally()
    token = _active.set(_active.get() + (tally,))
    try:
        yield tally
    finally:
        _active.reset(token)
