"""Unicast DAG networks with per-edge integer fading.

A node transmits one l-level symbol per timestep; every outgoing edge
carries that same symbol through its own fading level. A receiver
aligns its incoming contributions to the largest incoming level and
XORs them, exactly as the two-user MAC does.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import networkx as nx
import numpy as np

from fading.fading import FadingPmf, StateSample, parse_pmf, sample_levels
from gf2core.gf2core import Gf2Matrix, rank_rows, shift_truncate_block
from utils.config import get_profile
from utils.parallel import chunk_ranges, map_chunks
from utils.seeding import stream

logger = logging.getLogger(__name__)


class ParseError(ValueError):
    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}" if line_no else message)


class CycleError(ParseError):
    def __init__(self, witness: Sequence[str], line_no: int | None = None):
        self.witness = list(witness)
        super().__init__(f"network has a cycle: {' -> '.join(self.witness)}", line_no)


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    pmf: FadingPmf
    line_no: int = 0


@dataclass(frozen=True)
class Cut:
    omega: frozenset[str]

    def members(self, order: Sequence[str]) -> list[str]:
        return [v for v in order if v in self.omega]

    def label(self, order: Sequence[str]) -> str:
        return ";".join(self.members(order))


@dataclass(eq=False)
class NetworkSpec:
    nodes: tuple[str, ...]
    levels: dict[str, int]
    edges: tuple[Edge, ...]
    source: str
    sink: str
    name: str = ""

    @cached_property
    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        for k, e in enumerate(self.edges):
            g.add_edge(e.src, e.dst, index=k)
        return g

    @cached_property
    def topological_order(self) -> list[str]:
        rank = {v: i for i, v in enumerate(self.nodes)}
        return list(nx.lexicographical_topological_sort(self.graph, key=rank.__getitem__))

    def in_edges(self, node: str) -> list[int]:
        return [k for k, e in enumerate(self.edges) if e.dst == node]

    def receive_height(self, node: str) -> int:
        """Largest number of levels a node can ever receive in one timestep."""
        return max((self.edges[k].pmf.n for k in self.in_edges(node)), default=0)

    @property
    def intermediates(self) -> list[str]:
        return [v for v in self.nodes if v not in (self.source, self.sink)]

    @property
    def pmfs(self) -> list[FadingPmf]:
        return [e.pmf for e in self.edges]


# parsing


def _split_args(tokens: list[str], line_no: int) -> tuple[list[str], dict[str, str]]:
    positional, named = [], {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if sep:
            if key in named:
                raise ParseError(f"option '{key}' given twice", line_no)
            named[key] = value
        else:
            positional.append(tok)
    return positional, named


def parse_network(text: str, name: str = "") -> NetworkSpec:
    nodes: list[str] = []
    levels: dict[str, int] = {}
    node_lines: dict[str, int] = {}
    raw_edges: list[Edge] = []
    ends: dict[str, tuple[str, int]] = {}

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        directive, *rest = line.split()
        args, opts = _split_args(rest, line_no)

        if directive == "node":
            if len(args) != 1 or set(opts) != {"levels"}:
                raise ParseError("expected 'node <name> levels=<l>'", line_no)
            node = args[0]
            if node in levels:
                raise ParseError(f"node '{node}' already declared on line {node_lines[node]}", line_no)
            try:
                l = int(opts["levels"])
            except ValueError:
                raise ParseError(f"levels must be an integer, got '{opts['levels']}'", line_no) from None
            if l < 1:
                raise ParseError(f"node '{node}' needs levels >= 1, got {l}", line_no)
            nodes.append(node)
            levels[node] = l
            node_lines[node] = line_no

        elif directive == "edge":
            if len(args) != 2 or set(opts) != {"pmf"}:
                raise ParseError("expected 'edge <from> <to> pmf=<level:prob,...>'", line_no)
            try:
                pmf = parse_pmf(opts["pmf"])
            except ValueError as e:
                raise ParseError(f"invalid pmf: {e}", line_no) from None
            raw_edges.append(Edge(args[0], args[1], pmf, line_no))

        elif directive in ("source", "sink"):
            if len(args) != 1 or opts:
                raise ParseError(f"expected '{directive} <name>'", line_no)
            if directive in ends:
                raise ParseError(f"{directive} already declared on line {ends[directive][1]}", line_no)
            ends[directive] = (args[0], line_no)

        else:
            raise ParseError(f"unknown directive '{directive}'", line_no)

    for directive in ("source", "sink"):
        if directive not in ends:
            raise ParseError(f"network declares no {directive}")
        node, line_no = ends[directive]
        if node not in levels:
            raise ParseError(f"{directive} '{node}' is not a declared node", line_no)
    source, sink = ends["source"][0], ends["sink"][0]
    if source == sink:
        raise ParseError("source and sink must differ", ends["sink"][1])

    seen: dict[tuple[str, str], int] = {}
    for e in raw_edges:
        for end in (e.src, e.dst):
            if end not in levels:
                raise ParseError(f"edge references undeclared node '{end}'", e.line_no)
        if e.src == e.dst:
            raise CycleError([e.src, e.dst], e.line_no)
        if (e.src, e.dst) in seen:
            raise ParseError(f"edge {e.src} -> {e.dst} already declared on line {seen[e.src, e.dst]}", e.line_no)
        seen[e.src, e.dst] = e.line_no
        if e.dst == source:
            raise ParseError(f"edge {e.src} -> {e.dst} enters the source", e.line_no)
        if e.src == sink:
            raise ParseError(f"edge {e.src} -> {e.dst} leaves the sink", e.line_no)
        if e.pmf.n > levels[e.src]:
            raise ParseError(
                f"edge {e.src} -> {e.dst} fades to level {e.pmf.n} but '{e.src}' has levels={levels[e.src]}",
                e.line_no,
            )

    net = NetworkSpec(tuple(nodes), levels, tuple(raw_edges), source, sink, name)
    try:
        cycle = nx.find_cycle(net.graph)
    except nx.NetworkXNoCycle:
        cycle = None
    if cycle:
        witness = [u for u, _ in cycle] + [cycle[0][0]]
        closing = max(seen[u, v] for u, v in cycle)
        raise CycleError(witness, closing)
    if not nx.has_path(net.graph, source, sink):
        logger.warning("Sink '%s' is unreachable from source '%s'", sink, source)
    return net


def load_network(path: Path | str) -> NetworkSpec:
    path = Path(path)
    if not path.exists():
        raise ValueError(f"Network file not found: {path}")
    return parse_network(path.read_text(), name=path.stem)


def longest_path_length(net: NetworkSpec) -> int:
    """Edges on the longest source -> sink path (0 if the sink is unreachable)."""
    g = net.graph
    if not nx.has_path(g, net.source, net.sink):
        return 0
    keep = (nx.descendants(g, net.source) | {net.source}) & (nx.ancestors(g, net.sink) | {net.sink})
    return int(nx.dag_longest_path_length(g.subgraph(keep)))


# cuts


def enumerate_cuts(net: NetworkSpec) -> list[Cut]:
    inner = net.intermediates
    limit = get_profile().limits.max_cut_nodes
    if len(inner) > limit:
        raise ValueError(
            f"{len(inner)} intermediate nodes give 2^{len(inner)} cuts; exhaustive enumeration allows {limit}"
        )
    cuts = []
    for mask in range(1 << len(inner)):
        omega = {net.source} | {v for i, v in enumerate(inner) if mask >> i & 1}
        cuts.append(Cut(frozenset(omega)))
    return cuts


@dataclass(frozen=True)
class CutLayout:
    """Where each crossing edge lands in a cut's transfer matrix."""

    cut: Cut
    crossing: tuple[int, ...]
    col_offset: dict[str, int] = field(hash=False)
    receivers: tuple[str, ...]
    ncols: int


def cut_layout(net: NetworkSpec, cut: Cut) -> CutLayout:
    if net.source not in cut.omega or net.sink in cut.omega:
        raise ValueError(f"Cut {sorted(cut.omega)} must contain the source and exclude the sink")
    offsets, col = {}, 0
    for v in cut.members(net.nodes):
        offsets[v] = col
        col += net.levels[v]
    crossing = tuple(k for k, e in enumerate(net.edges) if e.src in cut.omega and e.dst not in cut.omega)
    receivers = tuple(v for v in net.nodes if any(net.edges[k].dst == v for k in crossing))
    return CutLayout(cut, crossing, offsets, receivers, col)


def _cut_rows(net: NetworkSpec, layout: CutLayout, levels: Sequence[int]) -> list[int]:
    """Transfer-matrix rows as bitsets; levels[i] belongs to layout.crossing[i]."""
    rows: list[int] = []
    for v in layout.receivers:
        incoming = [(net.edges[k].src, m) for k, m in zip(layout.crossing, levels) if net.edges[k].dst == v]
        m_hat = max(m for _, m in incoming)
        for i in range(1, m_hat + 1):
            row = 0
            for src, m in incoming:
                k = i - (m_hat - m)
                if 1 <= k <= m:
                    row |= 1 << (layout.col_offset[src] + k - 1)
            rows.append(row)
    return rows


def _cut_rank(net: NetworkSpec, layout: CutLayout, levels: Sequence[int]) -> int:
    return rank_rows(_cut_rows(net, layout, levels), layout.ncols)


def transfer_matrix(net: NetworkSpec, cut: Cut, state: StateSample) -> Gf2Matrix:
    if len(state.levels) != len(net.edges):
        raise ValueError(f"State has {len(state.levels)} levels for {len(net.edges)} edges")
    layout = cut_layout(net, cut)
    blocks = []
    for v in layout.receivers:
        incoming = [k for k in layout.crossing if net.edges[k].dst == v]
        m_hat = max(state.levels[k] for k in incoming)
        block = np.zeros((m_hat, layout.ncols), dtype=np.uint8)
        for k in incoming:
            src = net.edges[k].src
            off = layout.col_offset[src]
            block[:, off:off + net.levels[src]] ^= shift_truncate_block(
                net.levels[src], state.levels[k], m_hat
            ).to_array()
        blocks.append(block)
    if not blocks:
        return Gf2Matrix.zeros(0, layout.ncols)
    return Gf2Matrix.from_array(np.vstack(blocks))


# cut-set bounds


@dataclass(frozen=True)
class CutValue:
    cut: Cut
    expected_rank: float
    worst_rank: int | None = None
    stderr: float | None = None


@dataclass(frozen=True)
class CutsetResult:
    value: float
    argmin_cut: Cut
    per_cut: list[CutValue]
    worst_case: float | None = None
    stderr: float | None = None
    samples: int | None = None

    def summary(self, net: NetworkSpec) -> dict:
        out = {
            "value": self.value,
            "argmin_cut": self.argmin_cut.members(net.nodes),
            "cuts": len(self.per_cut),
        }
        if self.worst_case is not None:
            out["worst_case"] = self.worst_case
        if self.stderr is not None:
            out["stderr"] = self.stderr
            out["samples"] = self.samples
        return out


def _argmin(values: Sequence[float]) -> int:
    # first minimum in enumeration order
    return min(range(len(values)), key=lambda i: (values[i], i))


def cutset_bound_exact(net: NetworkSpec) -> CutsetResult:
    """min over cuts of E_S rank, by enumerating the crossing-edge states of each cut."""
    limit = get_profile().limits.max_state_space
    per_cut = []
    for cut in enumerate_cuts(net):
        layout = cut_layout(net, cut)
        supports = [net.edges[k].pmf.support for k in layout.crossing]
        size = math.prod(len(s) for s in supports)
        if size > limit:
            raise ValueError(
                f"Cut {cut.label(net.nodes)} has {size} crossing-edge states, above the limit of {limit}"
            )
        expected, worst = [], None
        for combo in itertools.product(*supports):
            prob = math.prod(net.edges[k].pmf.p[m] for k, m in zip(layout.crossing, combo))
            r = _cut_rank(net, layout, combo)
            expected.append(prob * r)
            worst = r if worst is None else min(worst, r)
        per_cut.append(CutValue(cut, math.fsum(expected), worst))
        logger.debug("cut %s: E rank %.6f over %d states", cut.label(net.nodes), per_cut[-1].expected_rank, size)
    best = _argmin([c.expected_rank for c in per_cut])
    return CutsetResult(
        value=per_cut[best].expected_rank,
        argmin_cut=per_cut[best].cut,
        per_cut=per_cut,
        worst_case=float(min(c.worst_rank for c in per_cut)),
    )


def sample_edge_levels(net: NetworkSpec, rng: np.random.Generator, size: int) -> np.ndarray:
    """(size, edges) matrix of independent edge levels."""
    if not net.edges:
        return np.zeros((size, 0), dtype=np.int16)
    return np.column_stack([sample_levels(e.pmf, rng, size) for e in net.edges])


def _mc_chunk(net: NetworkSpec, layouts: list[CutLayout], seed: int, chunk: tuple[int, int, int]):
    index, start, stop = chunk
    levels = sample_edge_levels(net, stream(seed, "cutset-mc", index), stop - start)
    sums = []
    for layout in layouts:
        if not layout.crossing:
            sums.append((0, 0))
            continue
        states, inverse = np.unique(levels[:, list(layout.crossing)], axis=0, return_inverse=True)
        ranks = np.array([_cut_rank(net, layout, tuple(int(m) for m in s)) for s in states], dtype=np.int64)
        r = ranks[inverse.reshape(-1)]
        sums.append((int(r.sum()), int((r * r).sum())))
    return sums


def cutset_bound_mc(
    net: NetworkSpec,
    samples: int,
    seed: int,
    workers: int | None = None,
    progress: bool | None = None,
) -> CutsetResult:
    """Sample-mean cut values with common random numbers across cuts."""
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    sim = get_profile().simulation
    workers = sim.workers if workers is None else workers
    progress = sim.progress if progress is None else progress
    layouts = [cut_layout(net, cut) for cut in enumerate_cuts(net)]

    chunks = chunk_ranges(samples, sim.mc_chunk)
    results = map_chunks(
        lambda c: _mc_chunk(net, layouts, seed, c), chunks, workers=workers, progress=progress, desc="cut-set draws"
    )
    per_cut = []
    for j, layout in enumerate(layouts):
        s = sum(r[j][0] for r in results)
        ss = sum(r[j][1] for r in results)
        mean = s / samples
        if samples > 1:
            # exact integer arithmetic keeps point-mass variances at exactly 0
            var = max(samples * ss - s * s, 0) / (samples * (samples - 1))
            err = math.sqrt(var / samples)
        else:
            err = 0.0
        per_cut.append(CutValue(layout.cut, mean, None, err))
    best = _argmin([c.expected_rank for c in per_cut])
    return CutsetResult(
        value=per_cut[best].expected_rank,
        argmin_cut=per_cut[best].cut,
        per_cut=per_cut,
        stderr=per_cut[best].stderr,
        samples=samples,
    )


# block transmission


def receive_block(
    net: NetworkSpec,
    node: str,
    transmissions: dict[str, np.ndarray],
    block_levels: np.ndarray,
) -> np.ndarray:
    """Signal received by `node` over one block.

    transmissions[v] has shape (n, levels[v], *extra) and block_levels has
    shape (n, edges). The result has shape (n, receive_height(node), *extra):
    row i of timestep t holds received level i + 1, and rows at or above
    the timestep's aligned height stay zero. `extra` lets the same code
    carry plain bits, linear forms, or a batch of candidate messages.
    """
    n = block_levels.shape[0]
    extra = next(iter(transmissions.values())).shape[2:] if transmissions else ()
    out = np.zeros((n, net.receive_height(node), *extra), dtype=np.uint8)
    incoming = net.in_edges(node)
    if not incoming:
        return out
    levels = block_levels[:, incoming].astype(np.int64)
    m_hat = levels.max(axis=1)
    for col, k in enumerate(incoming):
        x = transmissions.get(net.edges[k].src)
        if x is None:
            continue
        m = levels[:, col]
        t_idx, k_idx = np.nonzero(np.arange(x.shape[1])[None, :] < m[:, None])
        out[t_idx, m_hat[t_idx] - m[t_idx] + k_idx] ^= x[t_idx, k_idx]
    return out
