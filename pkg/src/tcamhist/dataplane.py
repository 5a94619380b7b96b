"""Per-port packet path: every RTT sample is matched and counted."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Dict, Iterable, NamedTuple, Optional

import numpy as np

from ._validation import check_keys
from .exceptions import QuiescenceError
from .tcam import DEFAULT_CAPACITY, TernaryTable

DEFAULT_CHUNK = 1 << 18


class RttSample(NamedTuple):
    rtt_ns: int
    port: int = 0


@dataclass(frozen=True)
class RunReport:
    count: int
    wall_time_s: float

    @property
    def samples_per_sec(self):
        if self.wall_time_s <= 0:
            return float("inf") if self.count else 0.0
        return self.count / self.wall_time_s


class PortPipeline:
    """One RX port: its histogram table and the packets it has seen."""

    def __init__(self, port: int, table: Optional[TernaryTable] = None):
        self.port = port
        self.table = table if table is not None else TernaryTable()
        self._drivers = 0
        self._guard = threading.Lock()

    @property
    def packets_processed(self) -> int:
        return self.table.processed

    @property
    def active(self) -> bool:
        """True while a stream is being driven through this port."""
        return self._drivers > 0

    def _enter(self):
        with self._guard:
            self._drivers += 1

    def _leave(self):
        with self._guard:
            self._drivers -= 1

    def require_quiescent(self):
        if self.active:
            raise QuiescenceError(f"port {self.port} is processing traffic")

    def process(self, sample) -> Optional[int]:
        rtt = sample.rtt_ns if isinstance(sample, RttSample) else sample
        return self.table.match(rtt)

    def process_stream(self, samples, chunk_size: int = DEFAULT_CHUNK) -> RunReport:
        """Match every sample in ``samples``.

        ``samples`` may be an integer array, an iterable of ints or
        :class:`RttSample`, or an iterable of arrays (chunks). Arrays take
        the fast path; other iterables are batched into chunks first.
        """
        self._enter()
        t0 = time.perf_counter()
        count = 0
        try:
            for chunk in _chunks(samples, chunk_size):
                self.table.match_many(chunk)
                count += chunk.size
        finally:
            self._leave()
        return RunReport(count, time.perf_counter() - t0)


def _chunks(samples, chunk_size):
    if isinstance(samples, np.ndarray):
        arr = check_keys(samples)
        for i in range(0, arr.size, chunk_size):
            yield arr[i:i + chunk_size]
        return
    buf = []
    for item in samples:
        if isinstance(item, np.ndarray):
            if buf:
                yield check_keys(buf)
                buf = []
            yield check_keys(item)
            continue
        buf.append(item.rtt_ns if isinstance(item, RttSample) else item)
        if len(buf) >= chunk_size:
            yield check_keys(buf)
            buf = []
    if buf:
        yield check_keys(buf)


class DataPlane:
    """Independent pipelines keyed by RX port id."""

    def __init__(self, ports: Iterable[int] = (0,), capacity: int = DEFAULT_CAPACITY):
        self.capacity = capacity
        self.pipelines: Dict[int, PortPipeline] = {
            p: PortPipeline(p, TernaryTable(capacity)) for p in ports
        }

    def __getitem__(self, port) -> PortPipeline:
        return self.pipelines[port]

    def __contains__(self, port):
        return port in self.pipelines

    def process(self, sample: RttSample):
        return self.pipelines[sample.port].process(sample)

    def process_stream(self, samples: Iterable[RttSample]) -> Dict[int, RunReport]:
        """Route mixed-port samples to their pipelines."""
        by_port: Dict[int, list] = {}
        for s in samples:
            by_port.setdefault(s.port, []).append(s.rtt_ns)
        return {
            port: self.pipelines[port].process_stream(np.asarray(v, dtype=np.int64))
            for port, v in by_port.items()
        }
