"""Injectable clock so lifecycle and monitoring logic is testable without real sleeps."""

import threading
import time


class Clock:
    """Wall clock. Timestamps are integer milliseconds since the Unix epoch."""

    def now_ms(self) -> int:
        return int(time.time() * 1000)

    def sleep_ms(self, ms: float) -> None:
        time.sleep(ms / 1000.0)


class FakeClock(Clock):
    """Manually advanced clock for deterministic tests."""

    def __init__(self, start_ms: int = 0):
        self._now = start_ms
        self._lock = threading.Lock()

    def now_ms(self) -> int:
        with self._lock:
            return self._now

    def sleep_ms(self, ms: float) -> None:
        self.advance(ms)

    def advance(self, ms: float) -> None:
        with self._lock:
            self._now += int(ms)
