"""Frame-over-frame brace monitoring and the JSONL alarm log."""

from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import NonMonotonicTimestamps


class AlarmKind(str, enum.Enum):
    BRACE_REMOVED = "BRACE_REMOVED"
    UNIT_LOST = "UNIT_LOST"


@dataclass(frozen=True)
class FrameSnapshot:
    frame_id: str
    timestamp: int
    verdicts: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "verdicts", tuple(self.verdicts))
        ids = [v.unit_id for v in self.verdicts]
        if len(ids) != len(set(ids)):
            raise ValueError(f"snapshot {self.frame_id!r} has duplicate unit ids")

    def by_id(self) -> dict:
        return {v.unit_id: v for v in self.verdicts}


@dataclass(frozen=True)
class Alarm:
    unit_id: int
    frame_id_prev: str
    frame_id_curr: str
    kind: AlarmKind
    prev_central_hits: int
    curr_central_hits: int | None
    ts: int = 0

    def to_dict(self) -> dict:
        return {
            "ts": self.ts,
            "unit_id": self.unit_id,
            "kind": self.kind.value,
            "prev_frame": self.frame_id_prev,
            "curr_frame": self.frame_id_curr,
            "prev_hits": self.prev_central_hits,
            "curr_hits": self.curr_central_hits,
        }


def compare_frames(prev: FrameSnapshot, curr: FrameSnapshot) -> list:
    """Alarms for braces that disappeared (true -> false) and units missing from ``curr``."""
    if prev.timestamp > curr.timestamp:
        raise NonMonotonicTimestamps(f"{prev.frame_id} at {prev.timestamp} is later than {curr.frame_id} at {curr.timestamp}")
    now = curr.by_id()
    alarms = []
    for uid, before in sorted(prev.by_id().items()):
        after = now.get(uid)
        if after is None:
            alarms.append(
                Alarm(uid, prev.frame_id, curr.frame_id, AlarmKind.UNIT_LOST, before.central_hits, None, curr.timestamp)
            )
        elif before.brace_present and not after.brace_present:
            alarms.append(
                Alarm(uid, prev.frame_id, curr.frame_id, AlarmKind.BRACE_REMOVED,
                      before.central_hits, after.central_hits, curr.timestamp)
            )
    return alarms


class BraceMonitor:
    """Feeds snapshots in time order and raises alarms.

    With ``debounce=k`` a BRACE_REMOVED alarm fires once a unit that was last
    seen braced has been reported unbraced in ``k`` consecutive snapshots.
    ``debounce=1`` is exactly :func:`compare_frames` on consecutive pairs.
    """

    def __init__(self, debounce: int = 1):
        if debounce < 1:
            raise ValueError("debounce must be >= 1")
        self.debounce = debounce
        self.previous = None
        self._armed = {}  # unit_id -> (frame_id, hits) of the last braced sighting
        self._misses = {}

    def update(self, snapshot: FrameSnapshot) -> list:
        prev = self.previous
        if prev is not None and prev.timestamp > snapshot.timestamp:
            raise NonMonotonicTimestamps(f"{snapshot.frame_id} is older than {prev.frame_id}")
        alarms = []
        now = snapshot.by_id()
        if prev is not None:
            for uid, before in sorted(prev.by_id().items()):
                if uid not in now:
                    alarms.append(Alarm(uid, prev.frame_id, snapshot.frame_id, AlarmKind.UNIT_LOST,
                                        before.central_hits, None, snapshot.timestamp))
                    self._armed.pop(uid, None)
                    self._misses.pop(uid, None)
        for uid, v in sorted(now.items()):
            if v.brace_present:
                self._armed[uid] = (snapshot.frame_id, v.central_hits)
                self._misses[uid] = 0
            elif uid in self._armed:
                self._misses[uid] = self._misses.get(uid, 0) + 1
                if self._misses[uid] >= self.debounce:
                    frame_prev, hits_prev = self._armed.pop(uid)
                    if self.debounce == 1:
                        frame_prev = prev.frame_id
                    alarms.append(Alarm(uid, frame_prev, snapshot.frame_id, AlarmKind.BRACE_REMOVED,
                                        hits_prev, v.central_hits, snapshot.timestamp))
                    self._misses.pop(uid, None)
        alarms.sort(key=lambda a: (a.unit_id, a.kind.value))
        self.previous = snapshot
        return alarms


def append_log(alarms, path) -> int:
    """Append one JSON object per alarm; returns the number of lines written.

    An empty list leaves the file untouched (it is not even created).
    Single writer only.
    """
    alarms = list(alarms)
    if not alarms:
        return 0
    lines = "".join(json.dumps(a.to_dict(), sort_keys=False) + "\n" for a in alarms)
    with open(Path(path), "a", encoding="utf-8") as fh:
        fh.write(lines)
        fh.flush()
        os.fsync(fh.fileno())
    return len(alarms)


def read_log(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
