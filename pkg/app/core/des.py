"""
Discrete-event kernel: clock, future-event list, capacitated priority
resources and statistics accumulators.

One `Simulation` (calendar + resources) is a single-threaded world. Separate
replications build separate worlds and share nothing.
"""
from __future__ import annotations

import heapq
import logging
import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Deque, Dict, List, Optional, Tuple

from .errors import ParameterError, ResourceError, SchedulingError

logger = logging.getLogger(__name__)

STANDARD = 0
CRITICAL = 1

TRACE_HEADER = "time,seq,kind,entity_id"


@dataclass(frozen=True)
class Event:
    time: float
    seq: int
    kind: str
    entity_id: Optional[int] = None

    def trace_line(self) -> str:
        entity = "" if self.entity_id is None else str(self.entity_id)
        return f"{self.time!r},{self.seq},{self.kind},{entity}"


class EventCalendar:
    """Future-event list ordered by (time, seq); equal times pop in insertion order."""

    def __init__(self) -> None:
        self._heap: List[Tuple[float, int, Event]] = []
        self._seq = 0
        self.clock = 0.0

    def schedule(self, time: float, kind: str, entity_id: Optional[int] = None) -> Event:
        if not math.isfinite(time) or time < self.clock:
            raise SchedulingError(f"cannot schedule {kind!r} at t={time} (clock={self.clock})")
        event = Event(time=float(time), seq=self._seq, kind=kind, entity_id=entity_id)
        self._seq += 1
        heapq.heappush(self._heap, (event.time, event.seq, event))
        return event

    def pop_next(self) -> Optional[Event]:
        if not self._heap:
            return None
        _, _, event = heapq.heappop(self._heap)
        self.clock = event.time
        return event

    def peek(self) -> Optional[Event]:
        return self._heap[0][2] if self._heap else None

    def __len__(self) -> int:
        return len(self._heap)


class TallyStat:
    """Count/mean/variance of observations (Welford); drops observations before `warmup`."""

    def __init__(self, warmup: float = 0.0) -> None:
        self.warmup = warmup
        self.count = 0
        self._mean = 0.0
        self._m2 = 0.0

    def add(self, value: float, at_time: float = math.inf) -> None:
        if at_time < self.warmup:
            return
        self.count += 1
        delta = value - self._mean
        self._mean += delta / self.count
        self._m2 += delta * (value - self._mean)

    @property
    def mean(self) -> float:
        return self._mean if self.count else 0.0

    @property
    def variance(self) -> float:
        return self._m2 / (self.count - 1) if self.count > 1 else 0.0


class TimeWeightedStat:
    """Integral of a piecewise-constant level, counted only from `warmup` onwards."""

    def __init__(self, warmup: float = 0.0, level: float = 0.0) -> None:
        self.warmup = warmup
        self.level = level
        self._last = 0.0
        self.area = 0.0

    def update(self, now: float, new_level: float) -> None:
        start = max(self._last, self.warmup)
        if now > start:
            self.area += self.level * (now - start)
        self._last = now
        self.level = new_level

    def mean(self, now: float) -> float:
        self.update(now, self.level)
        span = now - self.warmup
        return self.area / span if span > 0 else 0.0


class RequestOutcome(str, Enum):
    GRANTED = "granted"
    ENQUEUED = "enqueued"


class Resource:
    """
    `capacity` identical units. Waiting requests are served highest priority
    first, FIFO within a priority class.
    """

    def __init__(self, name: str, capacity: int, warmup: float = 0.0) -> None:
        if capacity < 0:
            raise ParameterError(f"resource {name!r} capacity must be >= 0, got {capacity}")
        self.name = name
        self.capacity = int(capacity)
        self.in_service = 0
        self.grants = 0
        self.releases = 0
        self._holders: Dict[int, int] = {}
        self._queues: Dict[int, Deque[Tuple[int, int, float]]] = {}
        self.busy = TimeWeightedStat(warmup)
        self.queue_length = TimeWeightedStat(warmup)
        self.wait = TallyStat(warmup)

    @property
    def waiting(self) -> int:
        return sum(len(q) for q in self._queues.values())

    def _grant(self, entity_id: int, enqueue_time: float, now: float) -> None:
        self.in_service += 1
        self.grants += 1
        self._holders[entity_id] = self._holders.get(entity_id, 0) + 1
        self.wait.add(now - enqueue_time, at_time=now)

    def request(self, entity_id: int, priority: int, now: float) -> RequestOutcome:
        if self.in_service < self.capacity:
            self.busy.update(now, self.in_service + 1)
            self._grant(entity_id, now, now)
            return RequestOutcome.GRANTED
        self.queue_length.update(now, self.waiting + 1)
        self._queues.setdefault(priority, deque()).append((entity_id, priority, now))
        return RequestOutcome.ENQUEUED

    def release(self, entity_id: int, now: float) -> Optional[int]:
        """Free one unit; returns the entity granted in its place at the same instant, if any."""
        held = self._holders.get(entity_id, 0)
        if held <= 0:
            raise ResourceError(f"entity {entity_id} released {self.name!r} without holding it")
        if held == 1:
            del self._holders[entity_id]
        else:
            self._holders[entity_id] = held - 1
        self.in_service -= 1
        self.releases += 1

        for priority in sorted(self._queues, reverse=True):
            queue = self._queues[priority]
            if queue and self.in_service < self.capacity:
                nxt, _, enqueued_at = queue.popleft()
                self.queue_length.update(now, self.waiting)
                self._grant(nxt, enqueued_at, now)
                return nxt
        self.busy.update(now, self.in_service)
        return None

    def utilization(self, now: float) -> float:
        if self.capacity == 0:
            return 0.0
        return min(1.0, self.busy.mean(now) / self.capacity)


Handler = Callable[[Event], None]


class Simulation:
    """Calendar, resources and handler dispatch for one replication."""

    def __init__(self, warmup: float = 0.0, trace: bool = False) -> None:
        self.calendar = EventCalendar()
        self.warmup = warmup
        self.resources: Dict[str, Resource] = {}
        self._handlers: Dict[str, Handler] = {}
        self._trace: Optional[List[str]] = [] if trace else None

    @property
    def now(self) -> float:
        return self.calendar.clock

    def add_resource(self, name: str, capacity: int) -> Resource:
        res = Resource(name, capacity, warmup=self.warmup)
        self.resources[name] = res
        return res

    def on(self, kind: str, handler: Handler) -> None:
        self._handlers[kind] = handler

    def schedule(self, delay: float, kind: str, entity_id: Optional[int] = None) -> Event:
        return self.calendar.schedule(self.now + delay, kind, entity_id)

    def run(self, until: float = math.inf) -> int:
        """Dispatch events until the calendar is empty or the next event is past `until`."""
        processed = 0
        while True:
            nxt = self.calendar.peek()
            if nxt is None or nxt.time > until:
                break
            event = self.calendar.pop_next()
            assert event is not None
            if self._trace is not None:
                self._trace.append(event.trace_line())
            try:
                handler = self._handlers[event.kind]
            except KeyError:
                raise SchedulingError(f"no handler registered for event kind {event.kind!r}") from None
            handler(event)
            processed += 1
        logger.debug("simulation stopped at t=%.3f after %d events", self.now, processed)
        return processed

    def trace_lines(self) -> List[str]:
        return list(self._trace or [])

    def trace_csv(self) -> str:
        return "\n".join([TRACE_HEADER, *self.trace_lines()]) + "\n"
