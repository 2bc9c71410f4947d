import sys
from pathlib import Path
sys.path.append(str(Path(__file__).resolve().parent.parent))

import pytest

from codingsim.codingsim import SimConfig, simulate_random_coding
from network.network import cutset_bound_exact, load_network

NETS = Path(__file__).resolve().parent.parent / "networks"


def run(name, **cfg):
    return simulate_random_coding(load_network(NETS / name), SimConfig(**cfg))


def test_noiseless_pipe_decodes():
    report = run("two_node.net", rate=2.0, block_len=8, blocks=4, trials=5, seed=1)
    assert report.message_bits == 64
    assert report.slack == 1
    assert report.decode_errors == 0 and report.error_rate == 0.0


def test_diamond_threshold_behaviour():
    net = load_network(NETS / "diamond.net")
    assert cutset_bound_exact(net).value == pytest.approx(1.75)
    below = simulate_random_coding(net, SimConfig(rate=1.4, block_len=64, blocks=8, trials=200, seed=7))
    above = simulate_random_coding(net, SimConfig(rate=2.2, block_len=64, blocks=8, trials=200, seed=7))
    assert below.error_rate <= 0.05
    assert above.error_rate >= 0.9


@pytest.mark.parametrize("name", ["line_det.net", "diamond_det.net", "parallel_det.net"])
def test_deterministic_networks_decode_at_the_bound(name):
    net = load_network(NETS / name)
    bound = cutset_bound_exact(net).value
    rates = [
        simulate_random_coding(net, SimConfig(rate=bound, block_len=n, blocks=4, trials=10, seed=3)).error_rate
        for n in (32, 64, 128)
    ]
    assert rates[-1] <= 0.05
    assert rates[-1] <= rates[0]


@pytest.mark.parametrize("scheme", ["lookup-random", "linear-random"])
def test_schemes_agree_on_line(scheme):
    low = run("line.net", rate=0.25, block_len=4, blocks=1, trials=50, seed=5, scheme=scheme)
    high = run("line.net", rate=3.0, block_len=4, blocks=1, trials=50, seed=5, scheme=scheme)
    assert low.slack == 2
    assert low.error_rate <= 0.2
    assert high.error_rate >= 0.8


def test_lookup_has_no_false_errors_on_a_clean_pipe():
    report = run("two_node.net", rate=1.0, block_len=4, blocks=2, trials=20, seed=2, scheme="lookup-random")
    assert report.message_bits == 8
    assert report.decode_errors == 0


def test_effective_rate_grows_with_blocks():
    rates = [
        run("line.net", rate=1.0, block_len=8, blocks=b, trials=1, seed=0).effective_rate for b in (1, 2, 4, 8, 16)
    ]
    assert rates == sorted(rates) and len(set(rates)) == len(rates)
    assert rates[0] == pytest.approx(1.0 / 3.0)
    assert all(r < 1.0 for r in rates)


def test_reports_do_not_depend_on_workers():
    one = run("diamond.net", rate=1.0, block_len=16, blocks=2, trials=24, seed=11, workers=1)
    many = run("diamond.net", rate=1.0, block_len=16, blocks=2, trials=24, seed=11, workers=4)
    assert one == many


def test_config_rejections():
    with pytest.raises(ValueError, match="lookup-random"):
        SimConfig(rate=2.0, block_len=8, blocks=2, trials=1, seed=0, scheme="lookup-random")
    with pytest.raises(ValueError, match="Slack"):
        run("diamond.net", rate=1.0, block_len=8, blocks=2, slack=1, trials=1, seed=0)
    with pytest.raises(ValueError, match="tabulates"):
        run("diamond.net", rate=0.1, block_len=16, blocks=2, trials=1, seed=0, scheme="lookup-random")
    with pytest.raises(ValueError):
        SimConfig(rate=1.0, block_len=0, blocks=1, trials=1, seed=0)
