"""Capacity regions as halfspace lists, their support functions, and the Gaussian references."""

import logging
import math
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.optimize import linprog
from scipy.stats import qmc

from channels.channels import BcChannel, MacChannel
from fading.fading import SnrAtoms, expectation, expectation_max, pmf_from_snr, validate_snr
from utils.config import get_profile

logger = logging.getLogger(__name__)


class Constraint(BaseModel):
    """coeffs . R <= bound"""

    model_config = ConfigDict(frozen=True)

    coeffs: tuple[float, ...]
    bound: float


class RateRegion(BaseModel):
    model_config = ConfigDict(frozen=True)

    dim: int
    constraints: tuple[Constraint, ...]

    @model_validator(mode="after")
    def _check(self):
        if self.dim < 1:
            raise ValueError(f"Region dimension must be positive, got {self.dim}")
        for c in self.constraints:
            if len(c.coeffs) != self.dim:
                raise ValueError(f"Constraint {c.coeffs} does not have {self.dim} coefficients")
            if any(a < 0 for a in c.coeffs):
                raise ValueError(f"Constraint coefficients must be nonnegative: {c.coeffs}")
            if c.bound < 0:
                raise ValueError(f"Constraint bound must be nonnegative: {c.bound}")
        for axis in range(self.dim):
            if not any(c.coeffs[axis] > 0 for c in self.constraints):
                raise ValueError(f"Region is unbounded along axis {axis + 1}")
        return self

    def support(self, w: Sequence[float]) -> float:
        """max w.R over the region."""
        w = np.asarray(w, dtype=np.float64)
        if w.shape != (self.dim,):
            raise ValueError(f"Direction has {w.size} entries, region has dimension {self.dim}")
        a_ub = np.array([c.coeffs for c in self.constraints], dtype=np.float64)
        b_ub = np.array([c.bound for c in self.constraints], dtype=np.float64)
        res = linprog(-w, A_ub=a_ub, b_ub=b_ub, bounds=[(0, None)] * self.dim, method="highs")
        if res.status != 0:
            raise RuntimeError(f"Support LP failed: {res.message}")
        return float(-res.fun)

    def contains(self, point: Sequence[float], tol: float | None = None) -> bool:
        tol = get_profile().tolerances.lp if tol is None else tol
        point = np.asarray(point, dtype=np.float64)
        if np.any(point < -tol):
            return False
        return all(float(np.dot(c.coeffs, point)) <= c.bound + tol for c in self.constraints)

    def shifted(self, delta: float) -> "RateRegion":
        """Same facets with every bound moved by delta."""
        return RateRegion(
            dim=self.dim,
            constraints=tuple(Constraint(coeffs=c.coeffs, bound=c.bound + delta) for c in self.constraints),
        )

    def to_rows(self) -> list[list[float]]:
        return [[*c.coeffs, c.bound] for c in self.constraints]


def region(*rows: tuple[Sequence[float], float]) -> RateRegion:
    coeffs = [tuple(float(a) for a in r[0]) for r in rows]
    return RateRegion(
        dim=len(coeffs[0]),
        constraints=tuple(Constraint(coeffs=c, bound=float(b)) for c, (_, b) in zip(coeffs, rows)),
    )


class BcOperatingPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    m1: int
    i0: int
    r1: float
    r2: float

    @model_validator(mode="after")
    def _check(self):
        if not 0 <= self.i0 <= self.m1:
            raise ValueError(f"Split level i0={self.i0} outside 0..m1={self.m1}")
        if self.r1 != self.m1 - self.i0:
            raise ValueError(f"r1={self.r1} must equal m1 - i0 = {self.m1 - self.i0}")
        if self.r2 < 0:
            raise ValueError(f"r2 must be nonnegative, got {self.r2}")
        return self


def mac_region(ch: MacChannel) -> RateRegion:
    e1, e2 = expectation(ch.pmf1), expectation(ch.pmf2)
    return region(((1, 0), e1), ((0, 1), e2), ((1, 1), expectation_max([ch.pmf1, ch.pmf2])))


def _v_bits_received(i: int, i0: int, m1: int) -> int:
    """V levels seen by Receiver 2 at M2 = i when V holds levels 1..i0 and m1+1..n."""
    if i <= i0:
        return i
    if i <= m1:
        return i0
    return i0 + (i - m1)


def bc_inner_sweep(ch: BcChannel) -> list[BcOperatingPoint]:
    points = []
    for i0 in range(ch.m1 + 1):
        r2 = math.fsum(ch.pmf2.prob(i) * _v_bits_received(i, i0, ch.m1) for i in range(ch.n + 1))
        points.append(BcOperatingPoint(m1=ch.m1, i0=i0, r1=ch.m1 - i0, r2=r2))
    return points


def bc_outer_value(ch: BcChannel, mu: float) -> tuple[float, int]:
    """Maximised R1 + mu R2, with the split level i0 that attains it.

    Level j <= m1 goes to V when mu * P(M2 >= j) >= 1; ties go to V.
    """
    if not mu >= 0:
        raise ValueError(f"Weight mu must be >= 0, got {mu}")
    q = [ch.pmf2.tail(j) for j in range(ch.n + 1)]
    i0 = 0
    terms = []
    for j in range(1, ch.m1 + 1):
        gain = mu * q[j]
        if gain >= 1:
            i0 = j
        terms.append(max(1.0, gain))
    terms.extend(mu * q[j] for j in range(ch.m1 + 1, ch.n + 1))
    return math.fsum(terms), i0


def bc_region(ch: BcChannel) -> RateRegion:
    """Convex hull of the sweep points, closed downwards."""
    points = bc_inner_sweep(ch)
    rows: list[tuple[Sequence[float], float]] = [((1, 0), float(ch.m1)), ((0, 1), points[-1].r2)]
    for a, b in zip(points, points[1:]):
        d = b.r2 - a.r2
        rows.append(((d, 1), d * a.r1 + a.r2))
    return region(*rows)


def gaussian_p2p_rate(snr_values: SnrAtoms) -> float:
    atoms = validate_snr(snr_values)
    return math.fsum(q * 0.5 * math.log2(1.0 + s) for s, q in atoms)


def _gaussian_sum_rate(a1, a2, combine) -> float:
    return math.fsum(q1 * q2 * 0.5 * math.log2(1.0 + combine(s1, s2)) for s1, q1 in a1 for s2, q2 in a2)


def gaussian_mac_region(snr1_values: SnrAtoms, snr2_values: SnrAtoms) -> RateRegion:
    a1, a2 = validate_snr(snr1_values), validate_snr(snr2_values)
    return region(
        ((1, 0), gaussian_p2p_rate(a1)),
        ((0, 1), gaussian_p2p_rate(a2)),
        ((1, 1), _gaussian_sum_rate(a1, a2, lambda s1, s2: s1 + s2)),
    )


class MacGapChain(BaseModel):
    """Sum-rate chain linking the Gaussian MAC to the bit-level MAC."""

    model_config = ConfigDict(frozen=True)

    gaussian_sum: float
    two_max: float
    max_plus_half: float
    model_sum: float

    @property
    def holds(self) -> bool:
        tol = get_profile().tolerances.lp
        return self.gaussian_sum <= self.two_max + tol and self.two_max <= self.max_plus_half + tol


def mac_gap_chain(snr1_values: SnrAtoms, snr2_values: SnrAtoms) -> MacGapChain:
    a1, a2 = validate_snr(snr1_values), validate_snr(snr2_values)
    return MacGapChain(
        gaussian_sum=_gaussian_sum_rate(a1, a2, lambda s1, s2: s1 + s2),
        two_max=_gaussian_sum_rate(a1, a2, lambda s1, s2: 2 * max(s1, s2)),
        max_plus_half=_gaussian_sum_rate(a1, a2, lambda s1, s2: max(s1, s2)) + 0.5,
        model_sum=expectation_max([pmf_from_snr(a1), pmf_from_snr(a2)]),
    )


def region_directions(dim: int, count: int) -> np.ndarray:
    """Halton points mapped onto the simplex, plus the axes and the all-ones direction."""
    if count < 1:
        raise ValueError(f"directions must be >= 1, got {count}")
    # first Halton point is the origin
    u = qmc.Halton(d=dim, scramble=False).random(count + 1)[1:]
    spread = -np.log(u)
    simplex = spread / spread.sum(axis=1, keepdims=True)
    fixed = np.vstack([np.eye(dim), np.full((1, dim), 1.0 / dim)])
    return np.vstack([fixed, simplex])


def region_gap(a: RateRegion, b: RateRegion, directions: int | None = None) -> float:
    if a.dim != b.dim:
        raise ValueError(f"Cannot compare regions of dimension {a.dim} and {b.dim}")
    directions = get_profile().regions.directions if directions is None else directions
    gap = 0.0
    for w in region_directions(a.dim, directions):
        gap = max(gap, abs(a.support(w) - b.support(w)))
    logger.debug("Region gap over %d directions: %.6f", directions, gap)
    return gap
