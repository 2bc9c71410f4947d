import sys
from pathlib import Path
sys.path.append(str(Path(__file__).resolve().parent.parent))

import itertools

import numpy as np
import pytest

from fading.fading import StateSample
from gf2core.gf2core import Gf2Matrix, rank
from network.network import (
    Cut,
    CycleError,
    ParseError,
    cut_layout,
    cutset_bound_exact,
    cutset_bound_mc,
    enumerate_cuts,
    load_network,
    longest_path_length,
    parse_network,
    receive_block,
    transfer_matrix,
)

NETS = Path(__file__).resolve().parent.parent / "networks"


def cut(*names):
    return Cut(frozenset(names))


def labels(net, cuts):
    return [c.label(net.nodes) for c in cuts]


def diamond_text(pmf="1:0.5,2:0.5", extra=""):
    return f"""
node S levels=2
node A levels=2
node B levels=2
node D levels=2
edge S A pmf={pmf}
edge S B pmf={pmf}
edge A D pmf={pmf}
edge B D pmf={pmf}
{extra}
source S
sink D
"""


def test_parse_examples():
    two = load_network(NETS / "two_node.net")
    assert two.nodes == ("S", "D") and len(two.edges) == 1
    diamond = parse_network(diamond_text())
    assert len(diamond.nodes) == 4 and len(diamond.edges) == 4
    assert diamond.source == "S" and diamond.sink == "D"


def test_parse_reports_undeclared_node_line():
    text = "node S levels=2\nnode D levels=2\n\nedge S X pmf=1:1.0\nsource S\nsink D\n"
    with pytest.raises(ParseError, match="line 4") as err:
        parse_network(text)
    assert err.value.line_no == 4


@pytest.mark.parametrize(
    "text, line",
    [
        ("node S levels=2\nnode S levels=2\nsource S\nsink S\n", 2),
        ("node S levels=x\n", 1),
        ("node S levels=2\nnode D levels=2\nedge S D pmf=1:0.7\nsource S\nsink D\n", 3),
        ("node S levels=1\nnode D levels=2\nedge S D pmf=2:1.0\nsource S\nsink D\n", 3),
        ("node S levels=2\nnode D levels=2\nedge S D pmf=1:1.0\nedge S D pmf=1:1.0\nsource S\nsink D\n", 4),
        ("node S levels=2\nnode D levels=2\nedge D S pmf=1:1.0\nsource S\nsink D\n", 3),
        ("node S levels=2\nfrobnicate\n", 2),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as err:
        parse_network(text)
    assert err.value.line_no == line


def test_parse_requires_source_and_sink():
    with pytest.raises(ParseError, match="no sink"):
        parse_network("node S levels=1\nsource S\n")


def test_cycle_reported_with_witness():
    text = diamond_text(extra="edge A B pmf=1:1.0\nedge B A pmf=1:1.0")
    with pytest.raises(CycleError) as err:
        parse_network(text)
    witness = err.value.witness
    assert witness[0] == witness[-1] and set(witness) == {"A", "B"}


def test_topology_helpers():
    diamond = load_network(NETS / "diamond.net")
    assert diamond.topological_order == ["S", "A", "B", "D"]
    assert longest_path_length(diamond) == 2
    assert longest_path_length(load_network(NETS / "two_node.net")) == 1
    assert longest_path_length(load_network(NETS / "parallel_det.net")) == 2


def test_enumerate_cuts_examples():
    two = load_network(NETS / "two_node.net")
    assert labels(two, enumerate_cuts(two)) == ["S"]
    line = load_network(NETS / "line.net")
    assert labels(line, enumerate_cuts(line)) == ["S", "S;A"]
    diamond = load_network(NETS / "diamond.net")
    assert labels(diamond, enumerate_cuts(diamond)) == ["S", "S;A", "S;B", "S;A;B"]


def test_enumerate_cuts_limit():
    names = [f"R{i}" for i in range(21)]
    text = "\n".join(
        ["node S levels=1", "node D levels=1"]
        + [f"node {v} levels=1" for v in names]
        + [f"edge S {v} pmf=1:1.0\nedge {v} D pmf=1:1.0" for v in names]
        + ["source S", "sink D"]
    )
    with pytest.raises(ValueError, match="21 intermediate"):
        enumerate_cuts(parse_network(text))


def test_transfer_matrix_examples():
    diamond = load_network(NETS / "diamond.net")
    a = transfer_matrix(diamond, cut("S"), StateSample((2, 1, 1, 1)))
    assert a == Gf2Matrix.from_rows(["10", "01", "10"])
    assert rank(a) == 2

    faded = transfer_matrix(parse_network(diamond_text("0:0.5,1:0.5")), cut("S"), StateSample((0, 0, 1, 1)))
    assert faded.rows == 0 and rank(faded) == 0

    mac = transfer_matrix(diamond, cut("S", "A", "B"), StateSample((1, 1, 1, 2)))
    # columns S1 S2 A1 A2 B1 B2
    assert mac == Gf2Matrix.from_rows(["000010", "001001"])
    assert rank(mac) == 2


def test_transfer_matrix_rejects_short_state():
    diamond = load_network(NETS / "diamond.net")
    with pytest.raises(ValueError):
        transfer_matrix(diamond, cut("S"), StateSample((1, 1)))


def test_rank_bounds_and_monotonicity():
    diamond = load_network(NETS / "diamond.net")
    for c in enumerate_cuts(diamond):
        layout = cut_layout(diamond, c)
        for levels in itertools.product((1, 2), repeat=4):
            a = transfer_matrix(diamond, c, StateSample(levels))
            r = rank(a)
            assert r <= a.rows and r <= layout.ncols
            for k in range(4):
                if levels[k] == 1:
                    raised = list(levels)
                    raised[k] = 2
                    assert rank(transfer_matrix(diamond, c, StateSample(tuple(raised)))) >= r


def test_cutset_exact_examples():
    two = cutset_bound_exact(load_network(NETS / "two_node.net"))
    assert two.value == 2.0
    diamond = load_network(NETS / "diamond.net")
    result = cutset_bound_exact(diamond)
    assert result.value == pytest.approx(1.75)
    assert result.argmin_cut == cut("S")
    assert [c.expected_rank for c in result.per_cut] == pytest.approx([1.75, 3.0, 3.0, 1.75])
    assert result.worst_case == 1.0
    assert all(c.worst_rank <= c.expected_rank for c in result.per_cut)


@pytest.mark.parametrize(
    "name, bound, argmin",
    [
        ("line_det.net", 2.0, ["S", "A"]),
        ("diamond_det.net", 2.0, ["S"]),
        ("parallel_det.net", 2.0, ["S"]),
        ("line.net", 1.0, ["S"]),
    ],
)
def test_deterministic_reduction(name, bound, argmin):
    net = load_network(NETS / name)
    result = cutset_bound_exact(net)
    assert result.value == bound
    assert result.argmin_cut.members(net.nodes) == argmin
    assert result.worst_case == bound


def test_edge_removal_never_increases_bound():
    full = cutset_bound_exact(parse_network(diamond_text())).value
    text = diamond_text().replace("edge B D pmf=1:0.5,2:0.5\n", "")
    assert cutset_bound_exact(parse_network(text)).value <= full
    text = diamond_text(extra="edge S D pmf=1:0.5,2:0.5")
    assert cutset_bound_exact(parse_network(text)).value >= full


def test_cutset_state_space_limit(monkeypatch):
    from utils import config

    limited = config.get_profile().model_copy(
        update={"limits": config.get_profile().limits.model_copy(update={"max_state_space": 3})}
    )
    monkeypatch.setattr("network.network.get_profile", lambda: limited)
    with pytest.raises(ValueError, match="crossing-edge states"):
        cutset_bound_exact(load_network(NETS / "diamond.net"))


def test_cutset_mc_point_mass_is_exact():
    net = load_network(NETS / "diamond_det.net")
    mc = cutset_bound_mc(net, samples=500, seed=3)
    assert mc.value == 2.0 and mc.stderr == 0.0
    assert cutset_bound_mc(net, samples=1, seed=3).stderr == 0.0


def test_cutset_mc_agrees_with_exact_on_diamond():
    net = load_network(NETS / "diamond.net")
    mc = cutset_bound_mc(net, samples=100_000, seed=17)
    assert abs(mc.value - 1.75) <= 3 * mc.stderr
    again = cutset_bound_mc(net, samples=100_000, seed=17, workers=3)
    assert again.value == mc.value and again.stderr == mc.stderr


def test_receive_block_aligns_and_xors():
    diamond = load_network(NETS / "diamond.net")
    levels = np.array([[2, 2, 1, 2], [2, 2, 2, 1]])
    xa = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    xb = np.array([[0, 1], [0, 1]], dtype=np.uint8)
    y = receive_block(diamond, "D", {"A": xa, "B": xb}, levels)
    # t=0: m_AD=1, m_BD=2 -> rows (B1, A1^B2); t=1: m_AD=2, m_BD=1 -> rows (A1, A2^B1)
    assert y.tolist() == [[0, 0], [1, 1]]
    forms = np.stack([xa, xb], axis=-1)
    y2 = receive_block(diamond, "D", {"A": forms, "B": forms[..., ::-1].copy()}, levels)
    assert y2.shape == (2, 2, 2)
