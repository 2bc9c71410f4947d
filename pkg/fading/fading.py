import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from utils.config import get_profile
from utils.seeding import uniform_at

logger = logging.getLogger(__name__)

# (snr, probability) atoms of a discrete SNR law
SnrAtoms = Sequence[tuple[float, float]]


class FadingPmf(BaseModel):
    """Distribution of the integer fading level M over {0..n}."""

    model_config = ConfigDict(frozen=True)

    n: int
    p: tuple[float, ...]

    @field_validator("n")
    @classmethod
    def _nonnegative(cls, n: int) -> int:
        if n < 0:
            raise ValueError(f"Maximum level n must be nonnegative, got {n}")
        return n

    @model_validator(mode="after")
    def _check(self):
        if len(self.p) != self.n + 1:
            raise ValueError(f"pmf over 0..{self.n} needs {self.n + 1} probabilities, got {len(self.p)}")
        if any(not math.isfinite(x) or x < 0 for x in self.p):
            raise ValueError(f"pmf probabilities must be finite and nonnegative: {self.p}")
        tol = get_profile().tolerances.pmf_sum
        if abs(math.fsum(self.p) - 1.0) > tol:
            raise ValueError(f"pmf probabilities sum to {math.fsum(self.p)!r}, not 1 (tolerance {tol})")
        return self

    @classmethod
    def from_mapping(cls, probs: dict[int, float], n: int | None = None) -> "FadingPmf":
        if not probs:
            raise ValueError("pmf needs at least one level")
        if any(level < 0 for level in probs):
            raise ValueError(f"Fading levels must be nonnegative: {sorted(probs)}")
        top = max(probs) if n is None else n
        if max(probs) > top:
            raise ValueError(f"Level {max(probs)} exceeds n={top}")
        return cls(n=top, p=tuple(float(probs.get(i, 0.0)) for i in range(top + 1)))

    @classmethod
    def point_mass(cls, level: int, n: int | None = None) -> "FadingPmf":
        return cls.from_mapping({level: 1.0}, n)

    @classmethod
    def uniform(cls, lo: int, hi: int) -> "FadingPmf":
        if not 0 <= lo <= hi:
            raise ValueError(f"Invalid uniform range {lo}..{hi}")
        w = 1.0 / (hi - lo + 1)
        return cls.from_mapping({i: w for i in range(lo, hi + 1)})

    @property
    def support(self) -> list[int]:
        return [i for i, x in enumerate(self.p) if x > 0]

    @property
    def max_level(self) -> int:
        return self.support[-1]

    def prob(self, i: int) -> float:
        return self.p[i] if 0 <= i <= self.n else 0.0

    def cdf(self) -> np.ndarray:
        c = np.cumsum(np.asarray(self.p, dtype=np.float64))
        c[-1] = 1.0
        return c

    def tail(self, j: int) -> float:
        """P(M >= j)."""
        return math.fsum(self.p[max(j, 0):])

    def to_text(self) -> str:
        return ",".join(f"{i}:{x!r}" for i, x in enumerate(self.p) if x > 0)


def parse_pmf(text: str) -> FadingPmf:
    """Parse 'level:prob,level:prob,...'."""
    probs: dict[int, float] = {}
    for item in text.strip().split(","):
        item = item.strip()
        if not item:
            continue
        level_text, sep, prob_text = item.partition(":")
        if not sep:
            raise ValueError(f"pmf entry '{item}' is not of the form level:prob")
        try:
            level, prob = int(level_text), float(prob_text)
        except ValueError:
            raise ValueError(f"pmf entry '{item}' is not of the form level:prob") from None
        if level in probs:
            raise ValueError(f"pmf lists level {level} twice")
        probs[level] = prob
    return FadingPmf.from_mapping(probs)


def expectation(pmf: FadingPmf) -> float:
    return math.fsum(i * x for i, x in enumerate(pmf.p))


def expectation_max(pmfs: Sequence[FadingPmf]) -> float:
    """E[max] of independent levels via the product of CDFs."""
    if not pmfs:
        raise ValueError("expectation_max needs at least one pmf")
    top = max(p.n for p in pmfs)
    cdfs = []
    for pmf in pmfs:
        c = np.ones(top + 1)
        c[: pmf.n + 1] = pmf.cdf()
        cdfs.append(c)
    joint = np.prod(np.vstack(cdfs), axis=0)
    # P(max >= k) = 1 - P(all <= k-1)
    return math.fsum(1.0 - joint[k - 1] for k in range(1, top + 1))


def sample(pmf: FadingPmf, seed: int, index: int) -> int:
    """Level drawn by inverse CDF from the uniform addressed by (seed, index)."""
    u = uniform_at(seed, "fading", index)
    return int(np.searchsorted(pmf.cdf(), u, side="right"))


def sample_levels(pmf: FadingPmf, rng: np.random.Generator, size) -> np.ndarray:
    u = rng.random(size)
    return np.searchsorted(pmf.cdf(), u, side="right").astype(np.int16)


@dataclass(frozen=True)
class StateSample:
    levels: tuple[int, ...]
    seed_path: tuple[int, ...] = ()

    def check(self, pmfs: Sequence[FadingPmf]) -> None:
        if len(self.levels) != len(pmfs):
            raise ValueError(f"State has {len(self.levels)} levels for {len(pmfs)} channels")
        for k, (level, pmf) in enumerate(zip(self.levels, pmfs)):
            if pmf.prob(level) <= 0:
                raise ValueError(f"Level {level} of channel {k} is outside its pmf support {pmf.support}")


def validate_snr(atoms: SnrAtoms) -> list[tuple[float, float]]:
    atoms = [(float(s), float(q)) for s, q in atoms]
    if not atoms:
        raise ValueError("SNR distribution needs at least one atom")
    low = [s for s, _ in atoms if not s >= 1.0]
    if low:
        raise ValueError(f"SNR values must be >= 1 (high-SNR regime), got {low}")
    if any(q < 0 for _, q in atoms):
        raise ValueError("SNR probabilities must be nonnegative")
    tol = get_profile().tolerances.pmf_sum
    total = math.fsum(q for _, q in atoms)
    if abs(total - 1.0) > tol:
        raise ValueError(f"SNR probabilities sum to {total!r}, not 1")
    return atoms


def parse_snr(text: str) -> list[tuple[float, float]]:
    """Parse 'snr:prob,snr:prob,...'."""
    atoms = []
    for item in text.strip().split(","):
        if not item.strip():
            continue
        snr_text, sep, prob_text = item.partition(":")
        try:
            atoms.append((float(snr_text), float(prob_text) if sep else 1.0))
        except ValueError:
            raise ValueError(f"SNR entry '{item}' is not of the form snr:prob") from None
    return validate_snr(atoms)


def snr_level(snr: float) -> int:
    """ceil(1/2 lg(1 + snr)), guarded against round-off just above an integer."""
    tol = get_profile().tolerances.snr_level
    return max(0, math.ceil(0.5 * math.log2(1.0 + snr) - tol))


def pmf_from_snr(snr_values: SnrAtoms) -> FadingPmf:
    atoms = validate_snr(snr_values)
    probs: dict[int, float] = {}
    for snr, q in atoms:
        level = snr_level(snr)
        probs[level] = probs.get(level, 0.0) + q
    total = math.fsum(probs.values())
    return FadingPmf.from_mapping({k: v / total for k, v in probs.items()})
