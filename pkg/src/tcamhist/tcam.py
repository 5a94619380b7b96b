"""Software model of a ternary match-action table with per-entry counters.

Keys are 32-bit RTT values. Every installed entry carries a prefix, an opaque
``bin_index`` (action data) and a 64-bit packet counter. Keys that match no
entry are counted as outliers, split into a below-range and an above-range
counter.

Two lookup paths exist. :meth:`TernaryTable.match_linear` walks every entry
and applies ``(key & mask) == value``; it is the reference. The batch path
(:meth:`TernaryTable.match_many`, also used by :meth:`TernaryTable.match`)
locates the single candidate entry with a binary search over the covered
intervals and then applies the same ternary test. Both paths count the same
way and both raise :class:`TableCorruptionError` on a double match.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Iterable, List, NamedTuple, Optional, Sequence

import numpy as np

from ._validation import check_keys
from .exceptions import CapacityError, TableCorruptionError, ValidationError
from .prefix import TernaryPrefix

DEFAULT_CAPACITY = 8196
KEY_BITS = 32
U64_MAX = (1 << 64) - 1

_U64_MAX_NP = np.uint64(U64_MAX)


@dataclass
class TernaryEntry:
    prefix: TernaryPrefix
    bin_index: int
    counter: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.prefix.width_bits != KEY_BITS:
            raise ValidationError(
                f"table entries must be {KEY_BITS}-bit prefixes, got {self.prefix.width_bits}"
            )
        if self.bin_index < 0:
            raise ValidationError("bin_index must be >= 0")


class CounterSnapshot(NamedTuple):
    entries: List[tuple]  # (entry_ordinal, bin_index, counter)
    miss_low: int
    miss_high: int
    processed: int

    @property
    def miss_total(self):
        return self.miss_low + self.miss_high


def _saturating_add(counters, inc):
    """In-place ``counters += inc`` on uint64 arrays, clamped at 2**64 - 1."""
    new = counters + inc
    wrapped = new < counters
    if wrapped.any():
        new[wrapped] = _U64_MAX_NP
    counters[...] = new


class TernaryTable:
    """Histogram match-action table.

    A single writer may call the ``match*`` methods while other threads call
    :meth:`read_counters`; an internal lock keeps each snapshot consistent
    with the number of processed keys. Installing and resetting require that
    no traffic is being matched.
    """

    def __init__(self, capacity: int = DEFAULT_CAPACITY):
        if isinstance(capacity, bool) or not isinstance(capacity, int) or capacity < 0:
            raise ValidationError(f"capacity must be a non-negative integer, got {capacity!r}")
        self.capacity = capacity
        self._lock = threading.Lock()
        self._clear()

    def _clear(self):
        self._prefixes: List[TernaryPrefix] = []
        self._bin_of_ordinal = np.zeros(0, dtype=np.int64)
        # sorted view, position -> values
        self._starts = np.zeros(0, dtype=np.int64)
        self._ends = np.zeros(0, dtype=np.int64)
        self._values = np.zeros(0, dtype=np.int64)
        self._masks = np.zeros(0, dtype=np.int64)
        self._ordinal = np.zeros(0, dtype=np.int64)
        self._bins_sorted = np.zeros(0, dtype=np.int64)
        self._counters = np.zeros(0, dtype=np.uint64)  # indexed by ordinal
        self._low_boundary: Optional[int] = None
        self.miss_low = 0
        self.miss_high = 0
        self.processed = 0

    def __len__(self):
        return len(self._prefixes)

    @property
    def entries(self) -> List[TernaryEntry]:
        with self._lock:
            counters = self._counters.tolist()
        return [
            TernaryEntry(p, int(b), int(c))
            for p, b, c in zip(self._prefixes, self._bin_of_ordinal.tolist(), counters)
        ]

    @property
    def low_boundary(self):
        return self._low_boundary

    def install_batch(self, entries: Sequence[TernaryEntry], low_boundary: Optional[int] = None):
        """Replace the table contents with ``entries`` in one step.

        Keys below ``low_boundary`` that miss count as low outliers, all
        other misses as high outliers. It defaults to the smallest covered
        key; an empty table without a boundary counts every miss as high.
        Nothing changes if validation fails.
        """
        entries = list(entries)
        if len(entries) > self.capacity:
            raise CapacityError(self.capacity, len(entries))
        for e in entries:
            if not isinstance(e, TernaryEntry):
                raise ValidationError(f"expected TernaryEntry, got {type(e).__name__}")

        n = len(entries)
        starts = np.fromiter((e.prefix.lo for e in entries), dtype=np.int64, count=n)
        ends = np.fromiter((e.prefix.hi for e in entries), dtype=np.int64, count=n)
        order = np.argsort(starts, kind="stable")
        s_starts, s_ends = starts[order], ends[order]
        if n > 1:
            bad = np.nonzero(s_starts[1:] <= s_ends[:-1])[0]
            if bad.size:
                i = int(bad[0])
                a, b = sorted((int(order[i]), int(order[i + 1])))
                raise ValidationError(
                    f"entries {a} ({entries[a].prefix}) and {b} ({entries[b].prefix}) overlap"
                )
        if low_boundary is None and n:
            low_boundary = int(s_starts[0])

        bins = np.fromiter((e.bin_index for e in entries), dtype=np.int64, count=n)
        with self._lock:
            self._clear()
            self._prefixes = [e.prefix for e in entries]
            self._bin_of_ordinal = bins
            self._starts = s_starts
            self._ends = s_ends
            self._values = np.fromiter((e.prefix.value for e in entries), dtype=np.int64, count=n)[order]
            self._masks = np.fromiter((e.prefix.mask for e in entries), dtype=np.int64, count=n)[order]
            self._ordinal = order.astype(np.int64)
            self._bins_sorted = bins[order]
            self._counters = np.zeros(n, dtype=np.uint64)
            self._low_boundary = low_boundary

    def reset(self):
        with self._lock:
            self._clear()

    def _count_miss(self, key):
        if self._low_boundary is not None and key < self._low_boundary:
            self.miss_low = min(self.miss_low + 1, U64_MAX)
        else:
            self.miss_high = min(self.miss_high + 1, U64_MAX)

    def match_linear(self, key: int) -> Optional[int]:
        """Reference lookup: test every entry's ternary pattern."""
        check_keys([key])
        hits = [i for i, p in enumerate(self._prefixes) if (key & p.mask) == p.value]
        if len(hits) > 1:
            raise TableCorruptionError(f"key {key} matched entries {hits}")
        with self._lock:
            self.processed += 1
            if not hits:
                self._count_miss(key)
                return None
            ordinal = hits[0]
            if self._counters[ordinal] != _U64_MAX_NP:
                self._counters[ordinal] += np.uint64(1)
            return int(self._bin_of_ordinal[ordinal])

    def match(self, key: int) -> Optional[int]:
        """Count ``key`` and return its bin index, or ``None`` on a miss."""
        out = self.match_many(np.array([key], dtype=np.int64))
        b = int(out[0])
        return None if b < 0 else b

    def _locate(self, keys):
        """Sorted position of the matching entry per key, -1 on a miss."""
        n = len(self._starts)
        if n == 0:
            return np.full(keys.shape, -1, dtype=np.int64)
        pos = np.searchsorted(self._starts, keys, side="right") - 1
        valid = pos >= 0
        p = np.where(valid, pos, 0)
        hit = valid & (keys <= self._ends[p]) & ((keys & self._masks[p]) == self._values[p])
        # any earlier entry still reaching the key means two entries match
        if n > 1:
            reach = np.maximum.accumulate(self._ends)
            prev = np.where(p > 0, reach[np.maximum(p - 1, 0)], -1)
            dup = valid & (p > 0) & (prev >= keys)
            if dup.any():
                k = int(keys[np.argmax(dup)])
                raise TableCorruptionError(f"key {k} is covered by overlapping entries")
        return np.where(hit, pos, -1)

    def lookup(self, keys) -> np.ndarray:
        """Bin index per key (-1 on a miss) without touching any counter."""
        keys = check_keys(keys)
        pos = self._locate(keys)
        out = np.full(keys.shape, -1, dtype=np.int64)
        m = pos >= 0
        out[m] = self._bins_sorted[pos[m]]
        return out

    def match_many(self, keys) -> np.ndarray:
        """Count every key and return its bin index (-1 on a miss)."""
        keys = check_keys(keys)
        pos = self._locate(keys)
        hit = pos >= 0
        out = np.full(keys.shape, -1, dtype=np.int64)
        out[hit] = self._bins_sorted[pos[hit]]
        n = len(self._starts)
        if n:
            inc_sorted = np.bincount(pos[hit], minlength=n).astype(np.uint64)
            inc = np.zeros(n, dtype=np.uint64)
            inc[self._ordinal] = inc_sorted
        miss = keys[~hit]
        if self._low_boundary is None:
            low = 0
        else:
            low = int(np.count_nonzero(miss < self._low_boundary))
        high = int(miss.size) - low
        with self._lock:
            if n:
                _saturating_add(self._counters, inc)
            self.miss_low = min(self.miss_low + low, U64_MAX)
            self.miss_high = min(self.miss_high + high, U64_MAX)
            self.processed += int(keys.size)
        return out

    def read_counters(self) -> CounterSnapshot:
        """Copy of all counters; reading never clears them."""
        with self._lock:
            counters = self._counters.tolist()
            bins = self._bin_of_ordinal.tolist()
            snap = CounterSnapshot(
                [(i, b, c) for i, (b, c) in enumerate(zip(bins, counters))],
                self.miss_low,
                self.miss_high,
                self.processed,
            )
        return snap

    def _preload_counter(self, ordinal, value):
        """Set one counter directly (used to exercise saturation)."""
        with self._lock:
            self._counters[ordinal] = np.uint64(value)


def entries_from_prefixes(prefixes: Iterable[TernaryPrefix], bin_index: int = 0) -> List[TernaryEntry]:
    return [TernaryEntry(p, bin_index) for p in prefixes]
