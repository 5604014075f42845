"""Tests for JSON and binary sketch encoding."""
import json
import math

import msgpack
import numpy as np
import pytest

from symnorm.encoder import JSONEncoder, SketchEncoder, read_json, write_json
from symnorm.exceptions import DecodingError, EncodingError
from symnorm.levels import LevelEstimate, SampleLevelSketch, level1_finalize, one_pass_sketch, plan_sketch
from symnorm.stream import UpdateStream, generate_stream


class TestJSONEncoding:
    """Test JSON encoding of records."""

    def test_non_finite_floats(self):
        """Test inf becomes a string and NaN becomes null."""
        data = json.loads(JSONEncoder.encode({"a": math.inf, "b": -math.inf, "c": math.nan}))
        assert data == {"a": "inf", "b": "-inf", "c": None}

    def test_numpy_values(self):
        """Test numpy arrays and scalars are plain JSON."""
        data = json.loads(JSONEncoder.encode({"v": np.arange(3), "s": np.float64(1.5), 3: "k"}))
        assert data == {"v": [0, 1, 2], "s": 1.5, "3": "k"}

    def test_to_dict_objects(self):
        """Test objects are encoded through to_dict and decoded through from_dict."""
        est = LevelEstimate(base=1.5, counts=[1.0, 0.0], q=[2, -1], eta=[0.3, 0.0], occupancy=[[1, 0]],
                            passes=1, repetitions=4, threshold=1.2, deflation=0.2, x=1.0)
        assert JSONEncoder.decode(JSONEncoder.encode(est), LevelEstimate) == est

    def test_compact(self):
        """Test indent=None gives one line."""
        assert b"\n" not in JSONEncoder.encode({"a": [1, 2]}, indent=None)

    def test_encoding_error(self):
        """Test unserializable values raise EncodingError."""
        with pytest.raises(EncodingError, match="JSON encoding failed"):
            JSONEncoder.encode({"x": object()})

    def test_decoding_error(self):
        """Test malformed JSON raises DecodingError."""
        with pytest.raises(DecodingError):
            JSONEncoder.decode(b"{not json")
        with pytest.raises(DecodingError):
            JSONEncoder.decode(b'{"base": 2.0}', LevelEstimate)

    def test_files(self, tmp_path):
        """Test write_json and read_json."""
        path = tmp_path / "r.json"
        write_json({"a": 1}, path)
        assert read_json(path) == {"a": 1}
        with pytest.raises(DecodingError, match="Cannot read"):
            read_json(tmp_path / "missing.json")


class TestSketchEncoding:
    """Test binary sketch snapshots."""

    @pytest.fixture
    def sketch(self, tiny_lab, planted_spec):
        sk = one_pass_sketch(512, 0.5, 0.05, 0.2, 0.01, seed=9, lab=tiny_lab)
        return sk.ingest(generate_stream(planted_spec))

    def test_round_trip(self, sketch):
        """Test a decoded snapshot equals the original sketch."""
        decoded = SketchEncoder.decode(SketchEncoder.encode(sketch))
        assert decoded.compatible(sketch)
        assert decoded.updates_seen == sketch.updates_seen
        assert np.array_equal(decoded.bank.counters, sketch.bank.counters)
        assert np.array_equal(decoded.bank.tracker_keys, sketch.bank.tracker_keys)

    def test_same_finalize(self, sketch):
        """Test a decoded snapshot finalizes to the same estimate."""
        decoded = SketchEncoder.decode(SketchEncoder.encode(sketch))
        a = level1_finalize(sketch, 0.5, 0.05, 0.2, 0.01, x=0.8)
        b = level1_finalize(decoded, 0.5, 0.05, 0.2, 0.01, x=0.8)
        assert a == b

    def test_tampered_seed(self, sketch):
        """Test a snapshot whose seed was changed is rejected."""
        body = msgpack.unpackb(SketchEncoder.encode(sketch), raw=False)
        body["seed"] = body["seed"] ^ 1
        with pytest.raises(DecodingError, match="fingerprint"):
            SketchEncoder.decode(msgpack.packb(body, use_bin_type=True))

    def test_wrong_format(self):
        """Test foreign MessagePack and garbage are rejected."""
        with pytest.raises(DecodingError, match="Not a symnorm sketch"):
            SketchEncoder.decode(msgpack.packb({"format": "other"}))
        with pytest.raises(DecodingError):
            SketchEncoder.decode(b"\xc1")

    def test_wrong_version(self, sketch):
        """Test other snapshot versions are rejected."""
        body = msgpack.unpackb(SketchEncoder.encode(sketch), raw=False)
        body["version"] = 99
        with pytest.raises(DecodingError, match="version"):
            SketchEncoder.decode(msgpack.packb(body, use_bin_type=True))

    def test_truncated_counters(self, sketch):
        """Test counters of the wrong size are rejected."""
        body = msgpack.unpackb(SketchEncoder.encode(sketch), raw=False)
        body["counters"] = body["counters"][:-8]
        with pytest.raises(DecodingError):
            SketchEncoder.decode(msgpack.packb(body, use_bin_type=True))

    def test_save_load_and_merge_shards(self, tmp_path, tiny_lab, planted_spec):
        """Test shards saved to disk merge into the whole-stream sketch."""
        stream = generate_stream(planted_spec)
        plan = plan_sketch(512, 0.1, 0.2, 0.01, alpha=2.0, passes=2, lab=tiny_lab)
        half = len(stream) // 2
        shards = [
            UpdateStream(512, stream.indices[:half], stream.deltas[:half]),
            UpdateStream(512, stream.indices[half:], stream.deltas[half:]),
        ]
        for k, shard in enumerate(shards):
            SketchEncoder.save(SampleLevelSketch(plan, 5).ingest(shard), tmp_path / f"s{k}.sketch")
        merged = SketchEncoder.load(tmp_path / "s0.sketch").merge(SketchEncoder.load(tmp_path / "s1.sketch"))
        whole = SampleLevelSketch(plan, 5).ingest(stream)
        assert np.array_equal(merged.bank.counters, whole.bank.counters)

    def test_load_missing(self, tmp_path):
        """Test a missing snapshot raises DecodingError."""
        with pytest.raises(DecodingError, match="Cannot read"):
            SketchEncoder.load(tmp_path / "absent.sketch")
