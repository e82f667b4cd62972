"""Discrete-event simulation of a delaying network path.

A message sent at tick ``t`` is assigned a physical delay in milliseconds
(fixed base plus a stochastic load term) and becomes available at the
first tick at or after its arrival. Nothing is lost or duplicated;
out-of-order delivery is representable because each message carries its
origin tick.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

DISTRIBUTIONS = ("constant", "exponential", "uniform")


@dataclass(frozen=True)
class DelayModel:
    """One-way transport delay: time-independent base plus a load term.

    The load term is drawn per tick from ``load_dist`` with mean
    ``load_mean_ms``; draws are a pure function of ``(seed, stream, tick)``
    so schedules are reproducible regardless of call order. ``uniform``
    uses ``load_width_ms`` (default ``2 * load_mean_ms``, i.e. support
    ``[0, 2 * mean]``), which keeps the mean exact.
    """

    base_ms: float = 0.0
    load_mean_ms: float = 0.0
    load_dist: str = "exponential"
    load_width_ms: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.base_ms < 0.0 or self.load_mean_ms < 0.0:
            raise ValueError("base_ms and load_mean_ms must be non-negative")
        if self.load_dist not in DISTRIBUTIONS:
            raise ValueError(
                f"unknown load distribution {self.load_dist!r}; "
                f"expected one of {DISTRIBUTIONS}"
            )
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.load_width_ms is not None:
            if not 0.0 <= self.load_width_ms <= 2.0 * self.load_mean_ms:
                raise ValueError(
                    "load_width_ms must lie in [0, 2 * load_mean_ms] to keep "
                    "the load non-negative"
                )

    @property
    def mean_ms(self) -> float:
        return self.base_ms + self.load_mean_ms

    def sample_ms(self, tick: int, stream: tuple[int, ...] = ()) -> float:
        """Delay for a message sent at ``tick``; deterministic in
        (seed, stream, tick)."""
        if self.load_dist == "constant" or self.load_mean_ms == 0.0:
            return self.base_ms + self.load_mean_ms
        rng = np.random.default_rng((self.seed, *stream, tick))
        if self.load_dist == "exponential":
            load = rng.exponential(self.load_mean_ms)
        else:  # uniform
            width = (
                2.0 * self.load_mean_ms
                if self.load_width_ms is None
                else self.load_width_ms
            )
            half = 0.5 * width
            load = rng.uniform(self.load_mean_ms - half, self.load_mean_ms + half)
        return self.base_ms + load


def quantize_delay(delay_ms: float, sample_period: float) -> int:
    """Whole sampling periods until a message is usable.

    A message arriving mid-interval waits for the next tick boundary,
    hence the ceiling.
    """
    if sample_period <= 0.0:
        raise ValueError("sample_period must be positive")
    if delay_ms < 0.0:
        raise ValueError("delay_ms must be non-negative")
    return math.ceil(delay_ms / (1000.0 * sample_period))


@dataclass(frozen=True)
class TimestampedMessage:
    """Payload plus the ticks at which it was sent and becomes available."""

    payload: Any
    origin_step: int
    delivery_step: int

    def __post_init__(self) -> None:
        if self.delivery_step < self.origin_step:
            raise ValueError("delivery_step must be >= origin_step")


class Channel:
    """One transport direction with an in-flight queue of timestamped messages.

    ``stream`` is extra RNG entropy so several channels can share one
    scenario seed without correlating their delays.
    """

    def __init__(
        self,
        model: DelayModel,
        sample_period: float,
        stream: tuple[int, ...] = (),
    ):
        if sample_period <= 0.0:
            raise ValueError("sample_period must be positive")
        self.model = model
        self.sample_period = sample_period
        self.stream = tuple(stream)
        self._queue: list[tuple[int, int, int, TimestampedMessage]] = []
        self._seq = 0
        self.sent = 0
        self.delivered = 0
        self.delay_log: list[tuple[int, float]] = []  # (tick, delay_ms) per send

    def send(self, payload, tick: int) -> TimestampedMessage:
        """Enqueue a message; its delivery tick is fixed at send time."""
        delay_ms = self.model.sample_ms(tick, self.stream)
        return self._send_with_delay(payload, tick, delay_ms)

    def _send_with_delay(
        self, payload, tick: int, delay_ms: float
    ) -> TimestampedMessage:
        steps = quantize_delay(delay_ms, self.sample_period)
        msg = TimestampedMessage(payload, tick, tick + steps)
        heapq.heappush(
            self._queue, (msg.delivery_step, msg.origin_step, self._seq, msg)
        )
        self._seq += 1
        self.sent += 1
        self.delay_log.append((tick, delay_ms))
        return msg

    def poll(self, tick: int) -> list[TimestampedMessage]:
        """Remove and return every message with delivery_step <= tick,
        ordered by delivery step then origin step."""
        out: list[TimestampedMessage] = []
        while self._queue and self._queue[0][0] <= tick:
            out.append(heapq.heappop(self._queue)[-1])
        self.delivered += len(out)
        return out

    @property
    def in_flight(self) -> int:
        return len(self._queue)
