"""Range-to-prefix conversion for ternary match tables.

An inclusive integer range ``[lo, hi]`` is split into power-of-two aligned
blocks, each of which is expressible as a single ternary ``(value, mask)``
pair. Starting at ``lo`` the largest aligned block that still fits inside
the range is emitted, and the walk continues right after it.

>>> [p.pattern for p in range_to_prefixes(IntRange(3, 8, 4))]
['0011', '01**', '1000']
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .exceptions import ValidationError

MAX_WIDTH = 32

# Largest width for which verify_decomposition() computes the optimum.
MINIMALITY_CHECK_MAX_WIDTH = 20
EXHAUSTIVE_MAX_WIDTH = 12


def _check_width(width_bits):
    if isinstance(width_bits, bool) or not isinstance(width_bits, int):
        raise ValidationError(f"width_bits must be an integer, got {width_bits!r}")
    if not 1 <= width_bits <= MAX_WIDTH:
        raise ValidationError(f"width_bits must be in [1, {MAX_WIDTH}], got {width_bits}")


@dataclass(frozen=True, order=True)
class IntRange:
    """Closed integer interval ``[lo, hi]`` inside a ``width_bits`` domain."""

    lo: int
    hi: int
    width_bits: int = MAX_WIDTH

    def __post_init__(self):
        _check_width(self.width_bits)
        top = (1 << self.width_bits) - 1
        if not (0 <= self.lo <= self.hi <= top):
            raise ValidationError(
                f"invalid range [{self.lo}, {self.hi}] for a {self.width_bits}-bit domain"
            )

    def __len__(self):
        return self.hi - self.lo + 1

    def __contains__(self, value):
        return self.lo <= value <= self.hi


@dataclass(frozen=True)
class TernaryPrefix:
    """A canonical ternary pattern with a prefix mask.

    Bits set in ``mask`` are compared, the rest are wildcards. Canonical form
    requires the wildcard bits of ``value`` to be zero, so two prefixes
    covering the same block compare equal.
    """

    value: int
    mask: int
    width_bits: int = MAX_WIDTH

    def __post_init__(self):
        _check_width(self.width_bits)
        full = (1 << self.width_bits) - 1
        if not (0 <= self.value <= full and 0 <= self.mask <= full):
            raise ValidationError("value and mask must fit in width_bits")
        wild = ~self.mask & full
        # a prefix mask's complement is a run of trailing ones: 0b0..01..1
        if wild & (wild + 1):
            raise ValidationError(f"mask {self.mask:#x} is not a prefix mask")
        if self.value & wild:
            raise ValidationError("value has bits set under the wildcard part of mask")

    @classmethod
    def from_block(cls, start, size_log2, width_bits=MAX_WIDTH):
        """Prefix covering ``[start, start + 2**size_log2 - 1]``."""
        full = (1 << width_bits) - 1
        mask = full & ~((1 << size_log2) - 1)
        return cls(start, mask, width_bits)

    @property
    def prefix_len(self):
        return bin(self.mask).count("1")

    @property
    def lo(self):
        return self.value

    @property
    def hi(self):
        full = (1 << self.width_bits) - 1
        return self.value | (~self.mask & full)

    @property
    def size(self):
        return 1 << (self.width_bits - self.prefix_len)

    @property
    def pattern(self):
        bits = format(self.value, f"0{self.width_bits}b")
        n = self.prefix_len
        return bits[:n] + "*" * (self.width_bits - n)

    def matches(self, key):
        return (key & self.mask) == self.value

    def expand(self):
        return range(self.lo, self.hi + 1)

    def __str__(self):
        w = self.width_bits
        return f"{self.value:0{w}b}/{self.mask:0{w}b} ({self.pattern})"


def range_to_prefixes(rng: IntRange) -> List[TernaryPrefix]:
    """Minimal prefix decomposition of ``rng``, ordered by block start."""
    out = []
    cur, hi, w = rng.lo, rng.hi, rng.width_bits
    while cur <= hi:
        # alignment of cur limits the block size from above, and so does the
        # remaining length of the range
        align = (cur & -cur).bit_length() - 1 if cur else w
        fit = (hi - cur + 1).bit_length() - 1
        k = min(align, fit)
        out.append(TernaryPrefix.from_block(cur, k, w))
        cur += 1 << k
    return out


def worst_case_entries_per_bin(width_bits: int) -> int:
    """Upper bound on prefixes needed for any ``width_bits``-bit range."""
    if isinstance(width_bits, bool) or not isinstance(width_bits, int) or width_bits < 2:
        raise ValidationError(f"width_bits must be an integer >= 2, got {width_bits!r}")
    return 2 * width_bits - 2


def worst_case_entries_total(num_bins: int, width_bits: int) -> int:
    if isinstance(num_bins, bool) or not isinstance(num_bins, int) or num_bins < 1:
        raise ValidationError(f"num_bins must be an integer >= 1, got {num_bins!r}")
    return num_bins * worst_case_entries_per_bin(width_bits)


def optimal_cover(lo: int, hi: int) -> Tuple[int, int]:
    """Size of the smallest aligned-block partition of ``[lo, hi]`` and how
    many distinct partitions reach it.

    Every decomposition is considered: from each position any aligned block
    that fits may be chosen. Overlapping covers never beat a partition because
    two overlapping aligned blocks are nested, so partitions suffice.
    """
    n = hi - lo + 1
    best = [0] * (n + 1)
    ways = [0] * (n + 1)
    ways[n] = 1
    for off in range(n - 1, -1, -1):
        x = lo + off
        b, c = None, 0
        size = 1
        while off + size <= n:
            if x % size:
                break
            cand = best[off + size] + 1
            if b is None or cand < b:
                b, c = cand, ways[off + size]
            elif cand == b:
                c += ways[off + size]
            size <<= 1
        best[off], ways[off] = b, c
    return best[0], ways[0]


@dataclass(frozen=True)
class DecompositionReport:
    covered: bool
    disjoint: bool
    # None when the range is too wide for the optimum to be computed
    minimal: Optional[bool]
    method: str
    optimum: Optional[int] = None

    def __iter__(self):
        return iter((self.covered, self.disjoint, self.minimal))


def verify_decomposition(rng: IntRange, prefixes: Sequence[TernaryPrefix]) -> DecompositionReport:
    """Check that ``prefixes`` partition ``rng`` and whether no smaller
    partition exists.

    Minimality is decided by enumerating all aligned-block partitions up to
    12-bit domains (``method="exhaustive"``), by the same recurrence for up to
    20 bits (``method="dp"``), and left unchecked (``minimal=None``) beyond.
    """
    for p in prefixes:
        if p.width_bits != rng.width_bits:
            raise ValidationError(
                f"prefix width {p.width_bits} does not match range width {rng.width_bits}"
            )
    blocks = sorted((p.lo, p.hi) for p in prefixes)
    disjoint = all(a[1] < b[0] for a, b in zip(blocks, blocks[1:]))

    # merge and compare the union with [lo, hi]
    merged = []
    for lo, hi in blocks:
        if merged and lo <= merged[-1][1] + 1:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    covered = merged == [[rng.lo, rng.hi]]

    if rng.width_bits > MINIMALITY_CHECK_MAX_WIDTH:
        return DecompositionReport(covered, disjoint, None, "not checked")
    method = "exhaustive" if rng.width_bits <= EXHAUSTIVE_MAX_WIDTH else "dp"
    optimum, _ = optimal_cover(rng.lo, rng.hi)
    minimal = covered and disjoint and len(prefixes) == optimum
    return DecompositionReport(covered, disjoint, minimal, method, optimum)
