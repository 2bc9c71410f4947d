"""Single-hop bit-level channels: point-to-point truncation, shift-XOR MAC, semi-deterministic BC."""

import logging
from dataclasses import dataclass

import numpy as np

from fading.fading import FadingPmf, expectation
from gf2core.gf2core import Gf2Matrix, LevelVector, shift_truncate_block

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class P2pChannel:
    n: int
    pmf: FadingPmf

    def __post_init__(self):
        if self.pmf.n > self.n:
            raise ValueError(f"pmf reaches level {self.pmf.n} but the input has only n={self.n} levels")


@dataclass(frozen=True)
class MacChannel:
    n1: int
    n2: int
    pmf1: FadingPmf
    pmf2: FadingPmf

    def __post_init__(self):
        for k, (n, pmf) in enumerate([(self.n1, self.pmf1), (self.n2, self.pmf2)], start=1):
            if pmf.n > n:
                raise ValueError(f"pmf{k} reaches level {pmf.n} but user {k} has only n{k}={n} levels")


@dataclass(frozen=True)
class BcChannel:
    n: int
    m1: int
    pmf2: FadingPmf

    def __post_init__(self):
        if not 0 < self.m1 < self.n:
            raise ValueError(f"Receiver 1 level m1={self.m1} must satisfy 0 < m1 < n={self.n}")
        if self.pmf2.n > self.n:
            raise ValueError(f"pmf2 reaches level {self.pmf2.n} but the input has only n={self.n} levels")


def _check_input(x: LevelVector, n: int, name: str = "x") -> None:
    if x.length != n:
        raise ValueError(f"{name} has {x.length} levels, channel expects {n}")


def _check_level(m: int, n: int, name: str = "m") -> None:
    if not 0 <= m <= n:
        raise ValueError(f"Fading level {name}={m} outside 0..{n}")


def p2p_output(ch: P2pChannel, x: LevelVector, m: int) -> LevelVector:
    _check_input(x, ch.n)
    _check_level(m, ch.n)
    return x.top(m)


def mac_output(ch: MacChannel, x1: LevelVector, x2: LevelVector, m1: int, m2: int) -> LevelVector:
    _check_input(x1, ch.n1, "x1")
    _check_input(x2, ch.n2, "x2")
    _check_level(m1, ch.n1, "m1")
    _check_level(m2, ch.n2, "m2")
    m_hat = max(m1, m2)
    bits = []
    for i in range(1, m_hat + 1):
        # levels at or below 0 read as 0
        bits.append(x1.level(i - (m_hat - m1)) ^ x2.level(i - (m_hat - m2)))
    return LevelVector(tuple(bits))


def mac_transfer_matrix(ch: MacChannel, m1: int, m2: int) -> Gf2Matrix:
    """[B1 | B2] acting on the concatenated inputs (x1, x2)."""
    _check_level(m1, ch.n1, "m1")
    _check_level(m2, ch.n2, "m2")
    m_hat = max(m1, m2)
    return shift_truncate_block(ch.n1, m1, m_hat).hstack(shift_truncate_block(ch.n2, m2, m_hat))


def bc_outputs(ch: BcChannel, x: LevelVector, m2: int) -> tuple[LevelVector, LevelVector]:
    _check_input(x, ch.n)
    _check_level(m2, ch.n, "m2")
    return x.top(ch.m1), x.top(m2)


def p2p_capacity(ch: P2pChannel) -> float:
    return expectation(ch.pmf)



def _entropy(counts) -> float:
    probs = np.asarray(counts, dtype=np.float64)
    probs = probs / probs.sum()
    return float(-np.sum(probs * np.log2(probs)))


def _top_levels(n: int, m: int) -> np.ndarray:
    """Top m levels of every n-bit input, as integers with level 1 most significant."""
    return np.arange(1 << n, dtype=np.int64) >> (n - m)


def p2p_output_entropy(ch: P2pChannel) -> float:
    """H(Y | M) under uniform iid input bits, by exhaustive enumeration."""
    total = 0.0
    for m in ch.pmf.support:
        _, counts = np.unique(_top_levels(ch.n, m), return_counts=True)
        total += ch.pmf.p[m] * _entropy(counts)
    return total


def mac_output_entropy(ch: MacChannel) -> float:
    """H(Y | M1, M2) under uniform iid inputs, by exhaustive enumeration.

    An aligned contribution of m levels occupies the bottom m of the m_hat
    output levels, so as integers the output is top(x1) XOR top(x2).
    """
    total = 0.0
    for m1 in ch.pmf1.support:
        for m2 in ch.pmf2.support:
            y = _top_levels(ch.n1, m1)[:, None] ^ _top_levels(ch.n2, m2)[None, :]
            _, counts = np.unique(y, return_counts=True)
            total += ch.pmf1.p[m1] * ch.pmf2.p[m2] * _entropy(counts)
    return total
