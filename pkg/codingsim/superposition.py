"""Superposition coding on the semi-deterministic broadcast channel.

Levels 1..i0 and m1+1..n carry V (for Receiver 2); levels i0+1..m1
carry U (for Receiver 1). Receiver 1 always sees the top m1 levels, so U
is delivered losslessly. Receiver 2 sees V level j at timestep t iff
M2(t) >= j, which turns every V level into an erasure channel across
the block. The V payload is protected by a systematic random linear
code over GF(2): payload bits fill the most reliable V slots first and
the remaining slots carry random parity combinations.
"""

import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict

from channels.channels import BcChannel, bc_outputs
from fading.fading import sample_levels
from gf2core.gf2core import LevelVector, pack_rows, packed_rank
from regions.regions import bc_inner_sweep
from utils.config import get_profile
from utils.parallel import chunk_ranges, map_chunks
from utils.seeding import stream

logger = logging.getLogger(__name__)


class GridPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    fraction: float  # of the I(V;Y2) target
    payload_bits: int
    failures: int
    trials_run: int
    failure_rate: float


class BcSimReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    i0: int
    block_len: int
    trials: int
    r1_achieved: float
    r2_achieved: float
    r2_target: float
    payload_bits: int
    failure_rate: float
    grid: tuple[GridPoint, ...]


def v_levels(ch: BcChannel, i0: int) -> list[int]:
    """V levels ordered by reception probability, most reliable first."""
    return list(range(1, i0 + 1)) + list(range(ch.m1 + 1, ch.n + 1))


def u_levels(ch: BcChannel, i0: int) -> list[int]:
    return list(range(i0 + 1, ch.m1 + 1))


def _check(ch: BcChannel, i0: int, block_len: int) -> None:
    if not 0 <= i0 <= ch.m1:
        raise ValueError(f"Split level i0={i0} outside 0..m1={ch.m1}")
    minimum = get_profile().bc_sim.min_block_len
    if block_len < minimum:
        raise ValueError(f"block_len={block_len} is below the minimum of {minimum}")


def _decodes(ch: BcChannel, i0: int, block_len: int, payload_bits: int, seed: int, trial: int) -> bool:
    m2 = sample_levels(ch.pmf2, stream(seed, "bc-fading", trial), block_len)
    # slot s = level_position * block_len + t
    seen = np.concatenate([m2 >= j for j in v_levels(ch, i0)])
    received = np.flatnonzero(seen)
    if received.size < payload_bits:
        return False
    systematic = received[received < payload_bits]
    unknown = payload_bits - systematic.size
    if unknown == 0:
        return True
    parity = received.size - systematic.size
    if parity < unknown:
        return False
    # coefficients on the systematic columns cancel out
    coeffs = stream(seed, "bc-code", payload_bits, trial).integers(0, 2, size=(parity, unknown), dtype=np.uint8)
    return packed_rank(pack_rows(coeffs), unknown, stop_at=unknown) == unknown


def _u_levels_recovered(ch: BcChannel, i0: int, block_len: int, seed: int, trial: int) -> int:
    """U levels Receiver 1 reproduces in every timestep of one block."""
    m2 = sample_levels(ch.pmf2, stream(seed, "bc-fading", trial), block_len)
    u = u_levels(ch, i0)
    if not u:
        return 0
    bits = stream(seed, "bc-input", trial).integers(0, 2, size=(block_len, ch.n), dtype=np.uint8)
    recovered = np.ones(len(u), dtype=bool)
    for t in range(block_len):
        x = LevelVector(tuple(bits[t]))
        y1, _ = bc_outputs(ch, x, int(m2[t]))
        recovered &= np.array([y1.level(j) == x.level(j) for j in u], dtype=bool)
    return int(recovered.sum())


def _r1_chunk(ch, i0, block_len, seed, chunk) -> int:
    _, start, stop = chunk
    return min(_u_levels_recovered(ch, i0, block_len, seed, t) for t in range(start, stop))


def _failure_chunk(ch, i0, block_len, payload_bits, seed, chunk) -> int:
    _, start, stop = chunk
    return sum(not _decodes(ch, i0, block_len, payload_bits, seed, t) for t in range(start, stop))


def bc_payload_failure_rate(
    ch: BcChannel,
    i0: int,
    block_len: int,
    payload_bits: int,
    trials: int,
    seed: int,
    workers: int | None = None,
    stop_at_failures: int | None = None,
) -> GridPoint:
    """Failure rate of one payload size; stops early once `stop_at_failures` is reached.

    The stopping point is decided in chunk order, so the result does not
    depend on the worker count.
    """
    _check(ch, i0, block_len)
    if payload_bits < 0:
        raise ValueError(f"payload_bits must be >= 0, got {payload_bits}")
    sim = get_profile().simulation
    workers = sim.workers if workers is None else workers
    chunks = chunk_ranges(trials, sim.trial_chunk)
    failures = done = 0
    for wave in range(0, len(chunks), workers):
        batch = chunks[wave:wave + workers]
        counts = map_chunks(
            lambda c: _failure_chunk(ch, i0, block_len, payload_bits, seed, c), batch, workers=workers
        )
        for (_, start, stop), count in zip(batch, counts):
            failures += count
            done = stop
            if stop_at_failures is not None and failures >= stop_at_failures:
                break
        if stop_at_failures is not None and failures >= stop_at_failures:
            break
    target_bits = bc_inner_sweep(ch)[i0].r2 * block_len
    return GridPoint(
        fraction=payload_bits / target_bits if target_bits > 0 else 0.0,
        payload_bits=payload_bits,
        failures=failures,
        trials_run=done,
        failure_rate=failures / done,
    )


def bc_superposition_sim(
    ch: BcChannel,
    i0: int,
    block_len: int,
    trials: int,
    seed: int,
    workers: int | None = None,
    progress: bool = False,
) -> BcSimReport:
    _check(ch, i0, block_len)
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    settings = get_profile().bc_sim
    target = bc_inner_sweep(ch)[i0].r2
    needed = max(1, math.ceil(settings.failure_threshold * trials))

    sim = get_profile().simulation
    workers = sim.workers if workers is None else workers
    r1_chunks = map_chunks(
        lambda c: _r1_chunk(ch, i0, block_len, seed, c),
        chunk_ranges(trials, sim.trial_chunk),
        workers=workers,
        progress=progress,
        desc="receiver 1",
    )
    # worst trial
    r1 = min(r1_chunks)

    grid: list[GridPoint] = []
    chosen: GridPoint | None = None
    for fraction in settings.payload_grid:
        payload = math.floor(fraction * target * block_len + 1e-9)
        point = bc_payload_failure_rate(ch, i0, block_len, payload, trials, seed, workers, stop_at_failures=needed)
        grid.append(point)
        logger.info("payload %d bits (%.2f of target): %d/%d failures", payload, fraction, point.failures, point.trials_run)
        if point.trials_run == trials and point.failure_rate < settings.failure_threshold:
            chosen = point
            break

    if chosen is None:
        # nothing passed: report the smallest payload over all trials
        smallest = grid[-1]
        full = bc_payload_failure_rate(ch, i0, block_len, smallest.payload_bits, trials, seed, workers)
        grid[-1] = full
        r2, payload, rate = 0.0, 0, grid[-1].failure_rate
    else:
        r2, payload, rate = chosen.payload_bits / block_len, chosen.payload_bits, chosen.failure_rate

    return BcSimReport(
        i0=i0,
        block_len=block_len,
        trials=trials,
        r1_achieved=float(r1),
        r2_achieved=r2,
        r2_target=target,
        payload_bits=payload,
        failure_rate=rate,
        grid=tuple(grid),
    )
