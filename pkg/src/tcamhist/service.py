"""Control plane: per-port configuration, counter polling and the stats
document served over HTTP (see :mod:`tcamhist.api`)."""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional

from . import histogram as hc
from .dataplane import PortPipeline
from .exceptions import DataIntegrityError, NotFoundError, ValidationError
from .tcam import DEFAULT_CAPACITY, TernaryTable

log = logging.getLogger(__name__)

DEFAULT_POLL_INTERVAL = 0.5
JSON_SAFE_MAX = (1 << 53) - 1


def _count(value, exact):
    if value > JSON_SAFE_MAX:
        exact[0] = False
        return str(value)
    return value


def stats_document(snapshot: hc.HistogramSnapshot, stats: hc.HistogramStats,
                   bins: List[hc.BinSpec], num_entries: int, port=None) -> dict:
    """JSON-ready view of a snapshot and its statistics.

    Counters above 2**53 - 1 are emitted as decimal strings and
    ``counts_exact`` is then false, telling clients that plain numeric
    parsing would lose precision.
    """
    exact = [True]
    doc = {
        "config": snapshot.config.to_dict(),
        "bin_width_ns": snapshot.config.bin_width_ns,
        "num_entries": num_entries,
        "bins": [
            {
                "index": b.index,
                "lo_ns": b.lo_ns,
                "hi_ns": b.hi_ns,
                "width_ns": b.width_ns,
                "midpoint_ns": b.midpoint_ns,
                "count": _count(c, exact),
            }
            for b, c in zip(bins, snapshot.bin_counts)
        ],
        "outliers": {
            "low": _count(snapshot.miss_low, exact),
            "high": _count(snapshot.miss_high, exact),
            "total": _count(snapshot.total_outliers, exact),
        },
        "total_in_range": _count(snapshot.total_in_range, exact),
        "total_packets": _count(snapshot.total, exact),
        "mean_ns": stats.mean_ns,
        "stddev_ns": stats.stddev_ns,
        "percentiles": (
            None if stats.percentiles is None
            else {_rank_key(k): v for k, v in stats.percentiles.items()}
        ),
        "captured_at": snapshot.captured_at,
    }
    if port is not None:
        doc = {"port": port, **doc}
    doc["counts_exact"] = exact[0]
    return doc


def _rank_key(rank):
    return str(int(rank)) if float(rank).is_integer() else str(rank)


@dataclass
class _Installed:
    config: hc.HistogramConfig
    bins: List[hc.BinSpec]
    num_entries: int


@dataclass
class PortState:
    pipeline: PortPipeline
    installed: Optional[_Installed] = None
    latest: Optional[tuple] = None  # (snapshot, stats), replaced as one object

    def __post_init__(self):
        self.lock = threading.Lock()


class HistogramService:
    """Per-port histogram registry with an optional background poller."""

    def __init__(self, ports: Iterable[int] = (0,), capacity: int = DEFAULT_CAPACITY,
                 poll_interval: float = DEFAULT_POLL_INTERVAL):
        if not poll_interval or poll_interval <= 0:
            raise ValidationError(f"poll interval must be positive, got {poll_interval!r}")
        self.capacity = capacity
        self.poll_interval = poll_interval
        self.ports: Dict[int, PortState] = {
            p: PortState(PortPipeline(p, TernaryTable(capacity))) for p in ports
        }
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None

    def _port(self, port) -> PortState:
        try:
            return self.ports[port]
        except KeyError:
            raise NotFoundError(f"unknown port {port}") from None

    def pipeline(self, port) -> PortPipeline:
        return self._port(port).pipeline

    def list_ports(self):
        out = []
        for p, st in sorted(self.ports.items()):
            inst = st.installed
            out.append({
                "port": p,
                "configured": inst is not None,
                "config": inst.config.to_dict() if inst else None,
                "num_entries": inst.num_entries if inst else 0,
                "packets_processed": st.pipeline.packets_processed,
            })
        return out

    def configure(self, port, config: hc.HistogramConfig) -> dict:
        """Compile and install ``config`` on ``port``, discarding old counters.

        Validation and capacity failures leave the port untouched.
        """
        st = self._port(port)
        with st.lock:
            st.pipeline.require_quiescent()
            entries = hc.compile(config, capacity=st.pipeline.table.capacity)
            st.pipeline.table.install_batch(entries, low_boundary=config.min_ns)
            bins = hc.plan_bins(config)
            st.installed = _Installed(config, bins, len(entries))
            st.latest = self._measure(st)
        return {
            "num_entries": len(entries),
            "bin_width_ns": config.bin_width_ns,
            "bins": config.num_bins,
        }

    def delete_config(self, port):
        st = self._port(port)
        with st.lock:
            if st.installed is None:
                raise NotFoundError(f"port {port} has no histogram configured")
            st.pipeline.require_quiescent()
            st.pipeline.table.reset()
            st.installed = None
            st.latest = None

    @staticmethod
    def _measure(st: PortState):
        inst = st.installed
        raw = st.pipeline.table.read_counters()
        snap = hc.aggregate(raw.entries, raw.miss_low, raw.miss_high, inst.config)
        # the table lock makes each reading self-consistent
        if snap.total != raw.processed:
            raise DataIntegrityError(
                f"counters sum to {snap.total} but {raw.processed} packets were processed"
            )
        return snap, hc.stats(snap, bins=inst.bins)

    def poll_once(self):
        for port, st in self.ports.items():
            with st.lock:
                if st.installed is None:
                    continue
                try:
                    st.latest = self._measure(st)
                except Exception:
                    log.exception("poll of port %s failed; keeping previous snapshot", port)

    def get_stats(self, port) -> dict:
        st = self._port(port)
        with st.lock:
            inst, latest = st.installed, st.latest
        if inst is None or latest is None:
            raise NotFoundError(f"port {port} has no histogram configured")
        snap, s = latest
        return stats_document(snap, s, inst.bins, inst.num_entries, port=port)

    def _run(self):
        while not self._stop.wait(self.poll_interval):
            self.poll_once()

    def start(self):
        if self._thread is not None:
            return
        self._stop.clear()
        self._thread = threading.Thread(target=self._run, name="histogram-poller", daemon=True)
        self._thread.start()

    def stop(self):
        if self._thread is None:
            return
        self._stop.set()
        self._thread.join()
        self._thread = None

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, *exc):
        self.stop()


def wait_for_poll(service: HistogramService, port, after: float, timeout: float = 5.0):
    """Block until the port's snapshot is newer than ``after`` (monotonic)."""
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        latest = service.ports[port].latest
        if latest is not None and latest[0].captured_at > after:
            return latest
        time.sleep(service.poll_interval / 10)
    raise TimeoutError(f"no poll of port {port} within {timeout} s")
