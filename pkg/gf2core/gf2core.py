"""Bit vectors and binary matrices over GF(2).

Bit levels are 1-based in the domain language (level 1 is the most
significant bit); in code a LevelVector stores level 1 at index 0.
Two elimination kernels live here: `rank_rows` on Python-int bitsets for
small matrices, and the numpy packed kernels (`packed_rank`, `solve`)
used by the coding simulations where systems reach thousands of rows.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

WORD = 64


@dataclass(frozen=True)
class LevelVector:
    bits: tuple[int, ...] = ()

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"LevelVector bits must be 0 or 1, got {self.bits}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_string(cls, text: str) -> "LevelVector":
        return cls(tuple(int(c) for c in text.strip()))

    @property
    def length(self) -> int:
        return len(self.bits)

    def level(self, i: int) -> int:
        """Bit at 1-based level i; levels outside 1..length read as 0."""
        return self.bits[i - 1] if 1 <= i <= len(self.bits) else 0

    def top(self, m: int) -> "LevelVector":
        return LevelVector(self.bits[:m])

    def __xor__(self, other: "LevelVector") -> "LevelVector":
        if other.length != self.length:
            raise ValueError(f"XOR of vectors with lengths {self.length} and {other.length}")
        return LevelVector(tuple(a ^ b for a, b in zip(self.bits, other.bits)))

    def __len__(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)

    def to_int(self) -> int:
        return sum(b << j for j, b in enumerate(self.bits))


@dataclass(frozen=True)
class Gf2Matrix:
    rows: int
    cols: int
    entries: tuple[int, ...] = ()

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError(f"Matrix dimensions must be nonnegative, got {self.rows}x{self.cols}")
        entries = tuple(int(e) for e in self.entries)
        if len(entries) != self.rows * self.cols:
            raise ValueError(
                f"A {self.rows}x{self.cols} matrix needs {self.rows * self.cols} entries, got {len(entries)}"
            )
        if any(e not in (0, 1) for e in entries):
            raise ValueError("Gf2Matrix entries must be 0 or 1")
        object.__setattr__(self, "entries", entries)

    # construction

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int] | str], cols: int | None = None) -> "Gf2Matrix":
        parsed = [tuple(int(c) for c in r) for r in rows]
        width = cols if cols is not None else (len(parsed[0]) if parsed else 0)
        if any(len(r) != width for r in parsed):
            raise ValueError(f"All rows must have {width} entries")
        return cls(len(parsed), width, tuple(e for r in parsed for e in r))

    @classmethod
    def from_array(cls, array: np.ndarray) -> "Gf2Matrix":
        array = np.asarray(array, dtype=np.uint8)
        if array.ndim != 2:
            raise ValueError(f"Expected a 2-D array, got shape {array.shape}")
        return cls(array.shape[0], array.shape[1], tuple(int(v) for v in array.reshape(-1)))

    @classmethod
    def identity(cls, n: int) -> "Gf2Matrix":
        return cls.from_array(np.eye(n, dtype=np.uint8))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Gf2Matrix":
        return cls(rows, cols, (0,) * (rows * cols))

    def to_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.uint8).reshape(self.rows, self.cols)

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def row_ints(self) -> list[int]:
        """Rows as bitsets, column j at bit j."""
        return [sum(e << j for j, e in enumerate(self.row(i))) for i in range(self.rows)]

    # composition

    def hstack(self, *others: "Gf2Matrix") -> "Gf2Matrix":
        mats = (self, *others)
        if any(m.rows != self.rows for m in mats):
            raise ValueError(f"hstack needs equal row counts, got {[m.rows for m in mats]}")
        if self.rows == 0:
            return Gf2Matrix.zeros(0, sum(m.cols for m in mats))
        return Gf2Matrix.from_array(np.hstack([m.to_array() for m in mats]))

    def vstack(self, *others: "Gf2Matrix") -> "Gf2Matrix":
        mats = (self, *others)
        if any(m.cols != self.cols for m in mats):
            raise ValueError(f"vstack needs equal column counts, got {[m.cols for m in mats]}")
        if self.cols == 0:
            return Gf2Matrix.zeros(sum(m.rows for m in mats), 0)
        return Gf2Matrix.from_array(np.vstack([m.to_array() for m in mats]))

    @staticmethod
    def block_diag(*blocks: "Gf2Matrix") -> "Gf2Matrix":
        out = np.zeros((sum(b.rows for b in blocks), sum(b.cols for b in blocks)), dtype=np.uint8)
        r = c = 0
        for b in blocks:
            out[r:r + b.rows, c:c + b.cols] = b.to_array()
            r, c = r + b.rows, c + b.cols
        return Gf2Matrix.from_array(out)


def rank_rows(rows: Iterable[int], ncols: int) -> int:
    """GF(2) rank of bitset rows; pivot is the lowest row index holding the column."""
    rows = [r for r in rows]
    rank = 0
    for c in range(ncols):
        if rank == len(rows):
            break
        bit = 1 << c
        pivot = next((i for i in range(rank, len(rows)) if rows[i] & bit), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank]
        for i in range(rank + 1, len(rows)):
            if rows[i] & bit:
                rows[i] ^= p
        rank += 1
    return rank


def rank(m: Gf2Matrix) -> int:
    return rank_rows(m.row_ints(), m.cols)


def mat_vec_mul(m: Gf2Matrix, x: LevelVector) -> LevelVector:
    if x.length != m.cols:
        raise ValueError(f"Cannot multiply a {m.rows}x{m.cols} matrix by a length-{x.length} vector")
    xi = x.to_int()
    return LevelVector(tuple((r & xi).bit_count() & 1 for r in m.row_ints()))


def shift_truncate_block(l: int, m: int, m_hat: int) -> Gf2Matrix:
    """m_hat x l block: rows 1..m_hat-m are zero, rows m_hat-m+1..m_hat read input levels 1..m."""
    if not 0 <= m <= l:
        raise ValueError(f"Fading level m={m} outside 0..l={l}")
    if m > m_hat:
        raise ValueError(f"Fading level m={m} exceeds alignment m_hat={m_hat}")
    out = np.zeros((m_hat, l), dtype=np.uint8)
    offset = m_hat - m
    for k in range(m):
        out[offset + k, k] = 1
    return Gf2Matrix.from_array(out)


# packed kernels


def pack_rows(bits: np.ndarray) -> np.ndarray:
    """(rows, cols) 0/1 array -> (rows, words) uint64, column c at bit c % 64 of word c // 64."""
    bits = np.asarray(bits, dtype=np.uint8)
    rows, cols = bits.shape
    words = max(1, -(-cols // WORD))
    padded = np.zeros((rows, words * WORD), dtype=np.uint8)
    padded[:, :cols] = bits
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").reshape(rows, words)


def packed_rank(words: np.ndarray, ncols: int, stop_at: int | None = None) -> int:
    """Forward elimination on packed rows; stops early once rank reaches stop_at."""
    a = np.array(words, dtype=np.uint64, copy=True)
    nrows = a.shape[0]
    limit = min(nrows, ncols) if stop_at is None else min(nrows, ncols, stop_at)
    r = 0
    for c in range(ncols):
        if r >= limit:
            break
        w, b = divmod(c, WORD)
        mask = np.uint64(1 << b)
        hits = np.flatnonzero(a[r:, w] & mask)
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            a[[r, p], w:] = a[[p, r], w:]
        below = r + 1 + np.flatnonzero(a[r + 1:, w] & mask)
        if below.size:
            a[below, w:] ^= a[r, w:]
        r += 1
    return r


@dataclass(frozen=True)
class Gf2Solution:
    solution: np.ndarray | None
    rank: int
    nullity: int
    consistent: bool

    @property
    def unique(self) -> bool:
        return self.consistent and self.nullity == 0


def solve(a: np.ndarray, y: np.ndarray) -> Gf2Solution:
    """Solve a x = y over GF(2) by Gauss-Jordan elimination on packed rows.

    Returns the particular solution with free variables at zero when the
    system is consistent, together with the rank and the nullity.
    """
    a = np.asarray(a, dtype=np.uint8)
    y = np.asarray(y, dtype=np.uint8).reshape(-1)
    nrows, ncols = a.shape
    if y.shape[0] != nrows:
        raise ValueError(f"Right-hand side has {y.shape[0]} entries for {nrows} equations")
    aug = pack_rows(np.hstack([a, y[:, None]]))
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        w, b = divmod(c, WORD)
        mask = np.uint64(1 << b)
        hits = np.flatnonzero(aug[r:, w] & mask)
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            aug[[r, p], w:] = aug[[p, r], w:]
        others = np.flatnonzero(aug[:, w] & mask)
        others = others[others != r]
        if others.size:
            aug[others, w:] ^= aug[r, w:]
        pivots.append(c)
        r += 1

    yw, yb = divmod(ncols, WORD)
    ymask = np.uint64(1 << yb)
    consistent = not np.any(aug[r:, yw] & ymask)
    nullity = ncols - r
    if not consistent:
        return Gf2Solution(None, r, nullity, False)
    x = np.zeros(ncols, dtype=np.uint8)
    for k, c in enumerate(pivots):
        x[c] = 1 if aug[k, yw] & ymask else 0
    return Gf2Solution(x, r, nullity, True)
