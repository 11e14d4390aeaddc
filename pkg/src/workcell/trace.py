"""Deterministic event traces.

Every run appends immutable events to a trace; the canonical serialization
(one JSON object per line, keys sorted, no whitespace) is what gets hashed,
written to disk, and diffed.  Two runs are considered identical exactly
when their digests match.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    tick: int
    kind: str
    payload: Dict[str, object]

    def canonical(self) -> str:
        return json.dumps(
            {"seq": self.seq, "tick": self.tick, "kind": self.kind,
             "payload": self.payload},
            sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_line(line: str) -> "TraceEvent":
        data = json.loads(line)
        return TraceEvent(int(data["seq"]), int(data["tick"]),
                          str(data["kind"]), data.get("payload") or {})


class ExecutionTrace:
    """Append-only event log with a stable content digest.

    The digest of an empty trace is the hash of zero bytes; each event
    contributes its canonical line plus a newline.
    """

    def __init__(self) -> None:
        self.events: List[TraceEvent] = []

    def append(self, event: TraceEvent) -> None:
        if self.events and event.seq <= self.events[-1].seq:
            raise ValueError("sequence numbers must increase")
        self.events.append(event)

    def __iter__(self) -> Iterator[TraceEvent]:
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def of_kind(self, *kinds: str) -> List[TraceEvent]:
        return [e for e in self.events if e.kind in kinds]

    def digest(self) -> str:
        hasher = hashlib.sha256()
        for event in self.events:
            hasher.update(event.canonical().encode("utf-8"))
            hasher.update(b"\n")
        return hasher.hexdigest()

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            for event in self.events:
                handle.write(event.canonical())
                handle.write("\n")

    @staticmethod
    def read(path: str) -> "ExecutionTrace":
        trace = ExecutionTrace()
        with open(path, "r", encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    trace.append(TraceEvent.from_line(line))
        return trace


def first_divergence(a: ExecutionTrace, b: ExecutionTrace) -> Optional[str]:
    """Human-readable description of the first point where two traces
    disagree, or None when they are identical."""
    for i, (ea, eb) in enumerate(zip(a.events, b.events)):
        if ea.canonical() != eb.canonical():
            return (f"event {i}: tick {ea.tick} seq {ea.seq} differs\n"
                    f"  left:  {ea.canonical()}\n"
                    f"  right: {eb.canonical()}")
    if len(a.events) != len(b.events):
        longer = "left" if len(a.events) > len(b.events) else "right"
        return (f"event {min(len(a.events), len(b.events))}: "
                f"only the {longer} trace continues")
    return None
