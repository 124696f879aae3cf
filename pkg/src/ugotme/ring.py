"""Fixed-capacity buffer of the most recent T frames.

Single producer (the network reader) pushes; any thread may snapshot.
Frames are immutable, so a snapshot only needs to copy references under
the lock; readers can never observe a torn frame.
"""

from __future__ import annotations

import threading

from .errors import InvalidWindow, StaleFrame
from .wire import FrameMsg

DEFAULT_CAPACITY = 640


class FrameRingBuffer:
    def __init__(self, capacity: int = DEFAULT_CAPACITY):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._slots: list[FrameMsg | None] = [None] * capacity
        self._cursor = 0
        self._count = 0
        self._last_seq: int | None = None
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return self._count

    def push(self, frame: FrameMsg) -> None:
        with self._lock:
            if self._last_seq is not None and frame.seq <= self._last_seq:
                raise StaleFrame(
                    f"frame seq {frame.seq} not greater than last seq {self._last_seq}"
                )
            self._slots[self._cursor] = frame
            self._cursor = (self._cursor + 1) % self.capacity
            self._count = min(self._count + 1, self.capacity)
            self._last_seq = frame.seq

    def snapshot(self, t_start_us: int, t_end_us: int) -> list[FrameMsg]:
        """Frames with t_start_us <= timestamp_us <= t_end_us, ascending."""
        if t_start_us > t_end_us:
            raise InvalidWindow(f"window start {t_start_us} > end {t_end_us}")
        with self._lock:
            frames = [f for f in self._slots if f is not None]
        frames = [f for f in frames if t_start_us <= f.timestamp_us <= t_end_us]
        frames.sort(key=lambda f: f.timestamp_us)
        return frames

    def snapshot_all(self) -> list[FrameMsg]:
        with self._lock:
            frames = [f for f in self._slots if f is not None]
        frames.sort(key=lambda f: f.timestamp_us)
        return frames

    def seqs(self) -> list[int]:
        return [f.seq for f in self.snapshot_all()]
