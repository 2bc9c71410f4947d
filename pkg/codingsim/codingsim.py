"""Block random coding over a quasi-deterministic network.

The message is split over B blocks of n timesteps and the network runs
for B + L blocks. In every block the source sends a fresh random
codeword of the whole message and each relay sends a fresh random
function of what it received in the previous block (a constant codeword
in block 1). The destination knows every codebook and every fading
state, re-simulates all candidate messages and succeeds only when the
true message is the single candidate that reproduces its observation.

Two realizations of the random functions:

* lookup-random: tabulated uniformly random maps, all candidates
  simulated at once (desk scale only);
* linear-random: uniformly random GF(2) linear maps, the destination
  solves a linear system and flags any nonzero null space.
"""

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from gf2core.gf2core import solve
from network.network import NetworkSpec, longest_path_length, receive_block, sample_edge_levels
from utils.config import get_profile
from utils.parallel import chunk_ranges, map_chunks
from utils.seeding import stream

logger = logging.getLogger(__name__)

Scheme = Literal["lookup-random", "linear-random"]


class SimConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    rate: float = Field(ge=0)
    block_len: int = Field(ge=1)
    blocks: int = Field(ge=1)
    slack: int | None = Field(default=None, ge=0)
    trials: int = Field(ge=1)
    seed: int = Field(ge=0)
    scheme: Scheme = "linear-random"
    workers: int = Field(default=1, ge=1)
    progress: bool = False

    @property
    def message_bits(self) -> int:
        return math.floor(self.block_len * self.rate * self.blocks + 1e-9)

    @model_validator(mode="after")
    def _desk_scale(self):
        limit = get_profile().limits.lookup_message_bits
        if self.scheme == "lookup-random" and self.block_len * self.rate * self.blocks > limit + 1e-9:
            raise ValueError(
                f"lookup-random enumerates 2^(n*R*B) messages; n*R*B = "
                f"{self.block_len * self.rate * self.blocks:g} exceeds {limit}"
            )
        return self


class SimReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    scheme: Scheme
    rate: float
    block_len: int
    blocks: int
    slack: int
    message_bits: int
    trials: int
    decode_errors: int
    error_rate: float
    atypical_fading_flag_count: int
    effective_rate: float

    def csv_row(self) -> list:
        return [
            self.rate,
            self.block_len,
            self.blocks,
            self.trials,
            self.decode_errors,
            self.error_rate,
            self.effective_rate,
        ]


@dataclass(frozen=True)
class _Pipeline:
    net: NetworkSpec
    cfg: SimConfig
    slack: int
    message_bits: int
    transmitters: tuple[str, ...]
    receivers: tuple[str, ...]
    node_index: dict[str, int]

    @property
    def total_blocks(self) -> int:
        return self.cfg.blocks + self.slack

    def code_rng(self, trial: int, node: str, block: int) -> np.random.Generator:
        return stream(self.cfg.seed, "code", trial, self.node_index[node], block)


def _atypical(net: NetworkSpec, levels: np.ndarray) -> bool:
    """Any edge whose empirical level frequencies stray more than 3 sigma from its pmf."""
    total = levels.shape[0]
    for k, edge in enumerate(net.edges):
        p = np.asarray(edge.pmf.p)
        freq = np.bincount(levels[:, k].astype(np.int64), minlength=p.size)[: p.size] / total
        sigma = np.sqrt(p * (1.0 - p) / total)
        if np.any(np.abs(freq - p) > 3.0 * sigma + 1e-12):
            return True
    return False


def _linear_trial(plan: _Pipeline, trial: int, levels: np.ndarray) -> bool:
    net, n, k = plan.net, plan.cfg.block_len, plan.message_bits
    if k == 0:
        return True
    message = stream(plan.cfg.seed, "message", trial).integers(0, 2, size=k, dtype=np.uint8)
    received: dict[str, np.ndarray] = {}
    observed = []
    for b in range(plan.total_blocks):
        tx = {}
        for v in plan.transmitters:
            rng, l = plan.code_rng(trial, v, b), net.levels[v]
            if v == net.source:
                tx[v] = rng.integers(0, 2, size=(n, l, k), dtype=np.uint8)
            elif b == 0:
                tx[v] = np.zeros((n, l, k), dtype=np.uint8)
            else:
                y = received[v].reshape(-1, k).astype(np.float64)
                f = rng.integers(0, 2, size=(n * l, y.shape[0])).astype(np.float64)
                tx[v] = (np.rint(f @ y) % 2).astype(np.uint8).reshape(n, l, k)
        block_levels = levels[b * n:(b + 1) * n]
        for v in plan.receivers:
            received[v] = receive_block(net, v, tx, block_levels)
        observed.append(received[net.sink].reshape(-1, k))

    forms = np.vstack(observed)
    y = (forms.astype(np.int64) @ message.astype(np.int64)) % 2
    sol = solve(forms, y)
    return sol.unique and bool(np.array_equal(sol.solution, message))


def _bits_to_index(bits: np.ndarray) -> np.ndarray:
    """(width, C) bit columns -> C integers, row j at bit j."""
    weights = np.left_shift(np.int64(1), np.arange(bits.shape[0], dtype=np.int64))
    return (bits.astype(np.int64) * weights[:, None]).sum(axis=0)


def _lookup_trial(plan: _Pipeline, trial: int, levels: np.ndarray) -> bool:
    net, n, k = plan.net, plan.cfg.block_len, plan.message_bits
    candidates = np.arange(1 << k, dtype=np.int64)
    message = int(stream(plan.cfg.seed, "message", trial).integers(0, 1 << k))
    received: dict[str, np.ndarray] = {}
    observed = []
    for b in range(plan.total_blocks):
        tx = {}
        for v in plan.transmitters:
            rng, l = plan.code_rng(trial, v, b), net.levels[v]
            if v == net.source:
                table = rng.integers(0, 2, size=(1 << k, n * l), dtype=np.uint8)
                rows = table[candidates]
            elif b == 0:
                table = rng.integers(0, 2, size=(1, n * l), dtype=np.uint8)
                rows = np.broadcast_to(table, (candidates.size, n * l))
            else:
                y = received[v].reshape(-1, candidates.size)
                table = rng.integers(0, 2, size=(1 << y.shape[0], n * l), dtype=np.uint8)
                rows = table[_bits_to_index(y)]
            tx[v] = np.ascontiguousarray(rows.T).reshape(n, l, candidates.size)
        block_levels = levels[b * n:(b + 1) * n]
        for v in plan.receivers:
            received[v] = receive_block(net, v, tx, block_levels)
        observed.append(received[net.sink].reshape(-1, candidates.size))

    signal = np.vstack(observed)
    matches = np.all(signal == signal[:, [message]], axis=0)
    return int(matches.sum()) == 1


def _plan(net: NetworkSpec, cfg: SimConfig) -> _Pipeline:
    longest = longest_path_length(net)
    slack = longest if cfg.slack is None else cfg.slack
    if slack < longest:
        raise ValueError(f"Slack L={slack} is shorter than the longest source-sink path ({longest} edges)")
    order = net.topological_order
    transmitters = tuple(v for v in order if v != net.sink and any(e.src == v for e in net.edges))
    receivers = tuple(v for v in order if v != net.source)
    plan = _Pipeline(net, cfg, slack, cfg.message_bits, transmitters, receivers, {v: i for i, v in enumerate(net.nodes)})

    if cfg.scheme == "lookup-random":
        limit = get_profile().limits.lookup_domain_bits
        for v in transmitters:
            width = cfg.block_len * net.receive_height(v)
            if v != net.source and width > limit:
                raise ValueError(
                    f"lookup-random tabulates 2^{width} inputs at node '{v}' (n={cfg.block_len} x "
                    f"{net.receive_height(v)} levels); the limit is 2^{limit}"
                )
    return plan


def _trial_chunk(plan: _Pipeline, chunk: tuple[int, int, int]) -> tuple[int, int]:
    _, start, stop = chunk
    run = _lookup_trial if plan.cfg.scheme == "lookup-random" else _linear_trial
    errors = flags = 0
    steps = plan.cfg.block_len * plan.total_blocks
    for trial in range(start, stop):
        levels = sample_edge_levels(plan.net, stream(plan.cfg.seed, "fading", trial), steps)
        flags += _atypical(plan.net, levels)
        errors += not run(plan, trial, levels)
    return errors, flags


def simulate_random_coding(net: NetworkSpec, cfg: SimConfig) -> SimReport:
    plan = _plan(net, cfg)
    logger.info(
        "%s on %s: R=%g n=%d B=%d L=%d, %d message bits, %d trials",
        cfg.scheme, net.name or "network", cfg.rate, cfg.block_len, cfg.blocks, plan.slack,
        plan.message_bits, cfg.trials,
    )
    chunks = chunk_ranges(cfg.trials, get_profile().simulation.trial_chunk)
    results = map_chunks(
        lambda c: _trial_chunk(plan, c), chunks, workers=cfg.workers, progress=cfg.progress, desc="trials"
    )
    errors = sum(e for e, _ in results)
    flags = sum(f for _, f in results)
    return SimReport(
        scheme=cfg.scheme,
        rate=cfg.rate,
        block_len=cfg.block_len,
        blocks=cfg.blocks,
        slack=plan.slack,
        message_bits=plan.message_bits,
        trials=cfg.trials,
        decode_errors=errors,
        error_rate=errors / cfg.trials,
        atypical_fading_flag_count=flags,
        effective_rate=cfg.rate * cfg.blocks / (cfg.blocks + plan.slack),
    )
