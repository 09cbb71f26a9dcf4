"""Abstract metering-infrastructure message channel.

Meters, generation sites, the head end and the load relays all talk over one
seeded, deterministic channel.  The default configuration is ideal (zero
latency, zero loss), matching an un-modeled wireless hop; latency and drops
are there for robustness experiments.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field

from .loads import MeterReading


@dataclass(frozen=True)
class MeterReport:
    reading: MeterReading


@dataclass(frozen=True)
class GenReport:
    site_id: str
    kw: float
    timestamp: float


@dataclass(frozen=True)
class Shed:
    load_id: str
    timestamp: float


@dataclass(frozen=True)
class Restore:
    load_id: str
    timestamp: float


Message = MeterReport | GenReport | Shed | Restore


@dataclass(frozen=True)
class ChannelConfig:
    latency_steps: int = 0
    drop_probability: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.latency_steps < 0:
            raise ValueError("latency_steps must be >= 0")
        if not 0.0 <= self.drop_probability <= 1.0:
            raise ValueError("drop_probability must be in [0, 1]")


@dataclass
class Channel:
    """Seeded delay/drop queue; delivery order is (due step, publish order)."""

    config: ChannelConfig = field(default_factory=ChannelConfig)
    published: int = 0
    delivered: int = 0
    dropped: int = 0
    _queue: list[tuple[int, int, Message]] = field(default_factory=list)
    _rng: random.Random = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._rng = random.Random(self.config.seed)

    def publish(self, msg: Message, t_now: int, latency: int | None = None) -> None:
        """Enqueue ``msg`` for delivery ``latency_steps`` engine steps later.

        With probability ``drop_probability`` (seeded, deterministic) the
        message is counted as dropped and never delivered.  ``latency``
        overrides the configured delay for this message only.
        """
        self.published += 1
        if self.config.drop_probability > 0.0:
            if self._rng.random() < self.config.drop_probability:
                self.dropped += 1
                return
        delay = self.config.latency_steps if latency is None else latency
        heapq.heappush(self._queue, (t_now + delay, self.published, msg))

    def poll_due(self, t_now: int) -> list[Message]:
        """Remove and return every undropped message due at or before ``t_now``."""
        out: list[Message] = []
        while self._queue and self._queue[0][0] <= t_now:
            out.append(heapq.heappop(self._queue)[2])
        self.delivered += len(out)
        return out

    @property
    def pending(self) -> int:
        return len(self._queue)
