import sys
from pathlib import Path
sys.path.append(str(Path(__file__).resolve().parent.parent))

import numpy as np
import pytest

from utils.config import load_profile, PROFILE_YAML
from utils.parallel import chunk_ranges, map_chunks
from utils.seeding import stream, uniform_at
from utils.utils import console, dump_json, log_json_block, save_json_log


def test_profile_defaults_load():
    profile = load_profile(PROFILE_YAML)
    assert profile.limits.max_cut_nodes == 20
    assert profile.limits.max_state_space == 2**24
    assert profile.bc_sim.failure_threshold == pytest.approx(0.01)
    assert list(profile.bc_sim.payload_grid) == sorted(profile.bc_sim.payload_grid, reverse=True)


def test_missing_profile_rejected(tmp_path):
    with pytest.raises(ValueError):
        load_profile(tmp_path / "nope.yaml")


def test_streams_are_addressed_by_path():
    a = stream(7, "mc", 3).random(5)
    b = stream(7, "mc", 3).random(5)
    c = stream(7, "mc", 4).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert uniform_at(1, 2) == uniform_at(1, 2)
    assert 0.0 <= uniform_at(1, 2) < 1.0


def test_map_chunks_order_is_worker_independent():
    items = list(range(23))
    serial = map_chunks(lambda i: stream(5, i).integers(0, 1000), items, workers=1)
    threaded = map_chunks(lambda i: stream(5, i).integers(0, 1000), items, workers=4)
    assert serial == threaded


def test_chunk_ranges_cover_total():
    ranges = chunk_ranges(10, 4)
    assert ranges == [(0, 0, 4), (1, 4, 8), (2, 8, 10)]


def test_dump_json_is_stable(tmp_path):
    text = dump_json({"b": 1, "a": [1, 2]})
    assert text == dump_json({"a": [1, 2], "b": 1})
    path = save_json_log({"x": 1.5}, tmp_path / "out" / "r.json")
    assert path.read_text() == '{\n  "x": 1.5\n}\n'


def test_summary_table_renders_rows_and_floats():
    with console.capture() as captured:
        log_json_block("Cut-set summary", {"value": 1.75, "argmin_cut": ["S"], "region": [[1.0, 1.0, 5.0]]})
    text = captured.get()
    assert "Cut-set summary" in text
    assert "1.75" in text and "1 1 5" in text
