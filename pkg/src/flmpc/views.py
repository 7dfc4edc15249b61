"""Append-only per-party views."""

from __future__ import annotations

import contextlib
import enum
from dataclasses import dataclass
from typing import Any


class EntryKind(str, enum.Enum):
    INPUT = "input"
    RANDOMNESS = "randomness"
    SYSPARAM = "sysparam"
    MSG_IN = "msg-in"
    MSG_OUT = "msg-out"
    ORACLE_QUERY = "oracle-query"
    ORACLE_ANSWER = "oracle-answer"
    OUTPUT = "output"


@dataclass(frozen=True)
class ViewEntry:
    seq: int
    round: int
    kind: EntryKind
    payload: Any


# Read auditing: when set, called with every view whose entries are read.
_read_hook = None


@contextlib.contextmanager
def watch_reads():
    """Record every PartyView whose entries are read inside the block."""
    global _read_hook
    seen: list[PartyView] = []
    previous = _read_hook
    _read_hook = seen.append
    try:
        yield seen
    finally:
        _read_hook = previous


class PartyView:
    """Everything one party has seen, in order. Entries can only be appended."""

    def __init__(self, party: int):
        self.party = party
        self._entries: list[ViewEntry] = []

    def append(self, kind: EntryKind, payload: Any, round: int = 0) -> ViewEntry:
        entry = ViewEntry(len(self._entries), round, EntryKind(kind), payload)
        self._entries.append(entry)
        return entry

    @property
    def entries(self) -> tuple[ViewEntry, ...]:
        if _read_hook is not None:
            _read_hook(self)
        return tuple(self._entries)

    def since(self, start: int) -> tuple[ViewEntry, ...]:
        return self.entries[start:]

    def of_kind(self, kind: EntryKind) -> list[ViewEntry]:
        return [e for e in self.entries if e.kind == kind]

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other):
        if not isinstance(other, PartyView):
            return NotImplemented
        return self.party == other.party and self._entries == other._entries

    def __repr__(self):
        return f"PartyView(party={self.party}, entries={len(self._entries)})"

    @classmethod
    def from_entries(cls, party: int, entries) -> PartyView:
        view = cls(party)
        for i, e in enumerate(entries):
            if e.seq != i:
                raise ValueError(f"party {party}: entry {i} has sequence number {e.seq}")
            view._entries.append(e)
        return view


@dataclass(frozen=True, eq=False)
class JointView:
    """The corrupted set together with its members' views, ascending by party."""

    corrupted: tuple[int, ...]
    views: tuple[PartyView, ...]

    def __eq__(self, other):
        if not isinstance(other, JointView):
            return NotImplemented
        return self.corrupted == other.corrupted and self.views == other.views

    def __hash__(self):
        return hash(self.corrupted)
