"""Deterministic discrete-event kernel: virtual clock, timed entry queue, seeded RNG streams.

Everything else in the simulator runs on top of this event loop. Entries are
totally ordered by (fire_at, seq) where seq is assigned in insertion order, so
two runs that schedule the same entries produce the same execution order.
"""

import hashlib
import heapq
import random
from dataclasses import dataclass, field
from typing import Any, Callable


class SchedulingInPastError(Exception):
    """Raised when an entry is scheduled before the current clock (a logic bug)."""


@dataclass
class TimedEntry:
    fire_at: float
    seq: int
    action: Callable[[], Any]
    kind: str = "timer"
    cancelled: bool = False


class Kernel:
    """Single-threaded event loop owning the virtual clock.

    Agents are logically concurrent but physically serialized: one entry's
    action runs to completion before the next is dequeued.
    """

    def __init__(self):
        self.now: float = 0.0
        self._heap: list[tuple[float, int, TimedEntry]] = []
        self._seq = 0
        self._live: dict[int, TimedEntry] = {}

    def __len__(self) -> int:
        return len(self._live)

    def schedule(self, fire_at: float, action: Callable[[], Any], kind: str = "timer") -> int:
        """Enqueue an action at a future (or current) virtual time; returns the entry id."""
        if fire_at < self.now:
            raise SchedulingInPastError(
                f"schedule at t={fire_at} before now={self.now}")
        entry = TimedEntry(fire_at, self._seq, action, kind)
        self._seq += 1
        heapq.heappush(self._heap, (entry.fire_at, entry.seq, entry))
        self._live[entry.seq] = entry
        return entry.seq

    def cancel(self, entry_id: int) -> bool:
        """True iff the entry existed and had not fired; cancelled entries never fire."""
        entry = self._live.pop(entry_id, None)
        if entry is None:
            return False
        entry.cancelled = True
        return True

    def _purge_cancelled(self) -> None:
        while self._heap and self._heap[0][2].cancelled:
            heapq.heappop(self._heap)

    def run_until_quiescent(self, limit: float = float("inf")) -> float:
        """Process entries in (fire_at, seq) order until the queue drains or the clock
        would pass `limit`. Hitting the limit is a normal outcome: the clock is left
        at `limit` and remaining entries stay queued."""
        while True:
            self._purge_cancelled()
            if not self._heap:
                return self.now
            fire_at, _, entry = self._heap[0]
            if fire_at > limit:
                self.now = limit
                return self.now
            heapq.heappop(self._heap)
            del self._live[entry.seq]
            self.now = fire_at
            entry.action()


class RngStream(random.Random):
    """Seeded random stream isolated by label.

    Identical (seed, stream_id) pairs always yield identical draw sequences,
    and distinct labels give independent streams so e.g. changing the event
    probability never perturbs the generated workload.
    """

    def __new__(cls, seed: int, stream_id: str):
        return super().__new__(cls)

    def __init__(self, seed: int, stream_id: str):
        self.base_seed = seed
        self.stream_id = stream_id
        digest = hashlib.sha256(f"{seed}:{stream_id}".encode()).digest()
        super().__init__(int.from_bytes(digest[:8], "big"))


@dataclass
class RngStreams:
    """The three standard streams: scenario generation, event injection, tie-breaks."""

    seed: int
    scenario: RngStream = field(init=False)
    events: RngStream = field(init=False)
    tie_break: RngStream = field(init=False)

    def __post_init__(self):
        self.scenario = RngStream(self.seed, "scenario")
        self.events = RngStream(self.seed, "events")
        self.tie_break = RngStream(self.seed, "tie-break")
