"""
RUN TELEMETRY
Wall-clock timing per command stage and process memory, logged as a
performance record and optionally attached to reports.
"""

import time
from collections import OrderedDict, deque
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Deque, Dict, Iterator

import psutil

from utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class StageTiming:
    name: str
    elapsed_ms: float
    rss_mb: float


class RunMonitor:
    """Collects stage timings for one CLI invocation"""

    def __init__(self, slow_stage_ms: float = 5000.0, history: int = 200):
        self.slow_stage_ms = slow_stage_ms
        self.stages: Deque[StageTiming] = deque(maxlen=history)
        self.start_time = time.perf_counter()
        self._process = psutil.Process()

    def _rss_mb(self) -> float:
        return self._process.memory_info().rss / 1024 / 1024

    @contextmanager
    def track(self, name: str) -> Iterator[None]:
        started = time.perf_counter()
        try:
            yield
        finally:
            elapsed = (time.perf_counter() - started) * 1000
            stage = StageTiming(name, elapsed, self._rss_mb())
            self.stages.append(stage)
            if elapsed > self.slow_stage_ms:
                logger.warning("slow stage", stage=name, elapsed_ms=round(elapsed, 1))
            else:
                logger.debug("stage finished", stage=name, elapsed_ms=round(elapsed, 1))

    def summary(self) -> Dict[str, Any]:
        """Timing section for reports; values are strings so the report stays exact"""
        stages = OrderedDict((s.name, f"{s.elapsed_ms:.3f}") for s in self.stages)
        total = (time.perf_counter() - self.start_time) * 1000
        return {
            'stages_ms': dict(stages),
            'total_ms': f"{total:.3f}",
            'peak_rss_mb': f"{max((s.rss_mb for s in self.stages), default=self._rss_mb()):.1f}",
        }

    def log_summary(self):
        logger.performance(self.summary())
