from __future__ import annotations

import json

import numpy as np
import pytest

from rsrepair.cluster import ClusterDir, ClusterIOError, ShardFile, bytes_to_element, data_bytes_per_symbol, element_to_data
from rsrepair.errors import CorruptionError, InvalidInputError, ParameterError


@pytest.fixture
def payload():
    return np.random.default_rng(99).bytes(700)


@pytest.fixture
def simple_cluster(tmp_path, simple_example, payload):
    return ClusterDir.create(tmp_path / "c", simple_example, payload, name="blob")


def test_shard_header_is_bit_exact():
    raw = ShardFile(258, b"xyz").to_bytes()
    assert raw[:7] == b"RSRP" + bytes([1]) + bytes([2, 1])
    assert ShardFile.from_bytes(raw) == ShardFile(258, b"xyz")
    with pytest.raises(CorruptionError):
        ShardFile.from_bytes(b"XXXX" + raw[4:])
    with pytest.raises(CorruptionError):
        ShardFile.from_bytes(raw[:4] + bytes([2]) + raw[5:])
    with pytest.raises(CorruptionError):
        ShardFile.from_bytes(b"RS")


@pytest.mark.parametrize("fixture", ["simple_example", "main_small"])
def test_data_packing_roundtrip(request, fixture):
    spec = request.getfixturevalue(fixture)
    B = data_bytes_per_symbol(spec.tower)
    assert 256**B <= spec.tower.p ** spec.l < 256 ** (B + 1)
    chunk = np.random.default_rng(0).bytes(B)
    assert element_to_data(bytes_to_element(spec.tower, chunk), B) == chunk


def test_layout(simple_cluster, simple_example, payload):
    c = simple_cluster
    B = data_bytes_per_symbol(simple_example.tower)
    assert c.stripes == -(-(len(payload) + 8) // (3 * B))
    sizes = {c.shard_path(j).stat().st_size for j in range(8)}
    assert sizes == {7 + c.stripes * 30}
    m = json.loads((c.root / "manifest.json").read_text())
    assert m["spec"]["l"] == 30
    assert m["file"]["size"] == len(payload)
    assert m["layout"]["stripes"] == c.stripes


@pytest.mark.parametrize("nodes", [[0, 1, 2], [5, 6, 7], [7, 2, 4]])
def test_decode_any_k(simple_cluster, payload, nodes):
    assert simple_cluster.decode(nodes) == payload


def test_single_stripe_roundtrip(tmp_path, main_small):
    data = b"hello"
    c = ClusterDir.create(tmp_path / "one", main_small, data)
    assert c.stripes == 1
    for j in range(3):
        assert c.decode([j]) == data


def test_empty_input_refused(tmp_path, simple_example):
    with pytest.raises(InvalidInputError):
        ClusterDir.create(tmp_path / "e", simple_example, b"")


def test_non_empty_dir_needs_force(tmp_path, simple_example, payload):
    ClusterDir.create(tmp_path / "c", simple_example, payload)
    with pytest.raises(ClusterIOError):
        ClusterDir.create(tmp_path / "c", simple_example, payload)
    ClusterDir.create(tmp_path / "c", simple_example, payload[:10], force=True)
    assert ClusterDir(tmp_path / "c").decode() == payload[:10]


@pytest.mark.parametrize("node,total_per_stripe", [(0, 60), (1, 50), (2, 42)])
def test_repair_byte_identical(simple_cluster, node, total_per_stripe):
    c = simple_cluster
    original = c.shard_path(node).read_bytes()
    c.fail(node)
    assert not c.shard_path(node).exists()
    report = ClusterDir(c.root).repair(node)
    assert report.checksum_ok
    assert c.shard_path(node).read_bytes() == original
    assert report.total == total_per_stripe * c.stripes
    assert report.ratio == 1
    assert report.total == sum(report.per_helper.values())
    assert report.trivial_total == 90 * c.stripes


def test_repair_errors(simple_cluster):
    c = simple_cluster
    with pytest.raises(InvalidInputError):
        c.repair(0)                          # still alive
    c.fail(0)
    with pytest.raises(InvalidInputError):
        c.repair(0, [0, 1, 2, 3])
    with pytest.raises(ParameterError):
        c.repair(0, [1, 2, 3])
    c.fail(1)
    with pytest.raises(InvalidInputError):
        c.repair(0, [1, 2, 3, 4])
    report = c.repair(0, [2, 3, 4, 5])
    assert report.checksum_ok
    assert 0 not in ClusterDir(c.root).failed


def test_forced_repair_of_live_node(simple_cluster):
    report = simple_cluster.repair(2, force=True, verify=True)
    assert report.checksum_ok and report.total == 42 * simple_cluster.stripes


def test_restart_determinism(simple_cluster):
    root = simple_cluster.root
    simple_cluster.fail(1)
    first = ClusterDir(root).repair(1).to_json()
    ClusterDir(root).fail(1)
    second = ClusterDir(root).repair(1, threads=1).to_json()
    assert first == second


def test_threads_env(simple_cluster, monkeypatch):
    monkeypatch.setenv("RSRP_THREADS", "3")
    simple_cluster.fail(0)
    assert simple_cluster.repair(0).checksum_ok
    monkeypatch.setenv("RSRP_THREADS", "many")
    simple_cluster.fail(0)
    with pytest.raises(ParameterError):
        simple_cluster.repair(0)


def test_corrupt_shard_detected(simple_cluster):
    c = simple_cluster
    path = c.shard_path(3)
    raw = bytearray(path.read_bytes())
    raw[5] = 9                               # node index field
    path.write_bytes(bytes(raw))
    with pytest.raises(CorruptionError):
        c.decode([3, 4, 5])
    path.write_bytes(bytes(raw[:20]))
    with pytest.raises(CorruptionError):
        c.symbols(3)


def test_tampered_helper_fails_checksum(simple_cluster):
    c = simple_cluster
    path = c.shard_path(2)
    raw = bytearray(path.read_bytes())
    raw[7] = (raw[7] + 1) % 5
    path.write_bytes(bytes(raw))
    c.fail(0)
    report = c.repair(0, [1, 2, 3, 4])
    assert not report.checksum_ok
    assert 0 in ClusterDir(c.root).failed


def test_out_of_range_coefficient_is_corruption(simple_cluster):
    path = simple_cluster.shard_path(4)
    raw = bytearray(path.read_bytes())
    raw[9] = 200
    path.write_bytes(bytes(raw))
    with pytest.raises(CorruptionError):
        simple_cluster.symbols(4)


def test_missing_manifest(tmp_path):
    with pytest.raises(ClusterIOError):
        ClusterDir(tmp_path)


def test_report_text(simple_cluster):
    simple_cluster.fail(2)
    text = simple_cluster.repair(2).to_text()
    assert "achieved/bound" in text and text.splitlines()[6].endswith("1")
