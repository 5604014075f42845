"""Encoding and decoding of symnorm artifacts.

- JSON: profiles, level estimates and reports (human-readable)
- Binary: MessagePack snapshots of SampleLevelSketch state, used to ingest
  stream shards in separate processes and merge them afterwards
"""
import json
from pathlib import Path
from typing import Any, Dict, Optional, Type, Union

import msgpack
import numpy as np

from symnorm.exceptions import DecodingError, EncodingError
from symnorm.levels import SampleLevelSketch, SketchPlan


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None if np.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


class JSONEncoder:
    """
    JSON encoding for anything with ``to_dict``.

    Non-finite floats are written as the strings "inf" / "-inf" and NaN as
    null, so the output is strict JSON.

    Example:
        >>> data = JSONEncoder.encode(profile)
        >>> JSONEncoder.decode(data, ConcentrationProfile).mmc_estimate
    """

    @staticmethod
    def encode(obj, indent: Optional[int] = 2) -> bytes:
        """
        Encode an object (or a plain dict) to UTF-8 JSON bytes.

        Raises:
            EncodingError: If encoding fails
        """
        try:
            data = obj.to_dict() if hasattr(obj, "to_dict") else obj
            return json.dumps(_jsonable(data), indent=indent, sort_keys=True).encode("utf-8")
        except Exception as e:
            raise EncodingError(f"JSON encoding failed: {str(e)}") from e

    @staticmethod
    def decode(data: Union[bytes, str], cls: Optional[Type] = None):
        """
        Decode JSON bytes, optionally into ``cls.from_dict``.

        Raises:
            DecodingError: If decoding fails
        """
        try:
            text = data.decode("utf-8") if isinstance(data, bytes) else data
            body = json.loads(text)
            return cls.from_dict(body) if cls is not None else body
        except Exception as e:
            raise DecodingError(f"JSON decoding failed: {str(e)}") from e


class SketchEncoder:
    """
    Binary snapshots of a SampleLevelSketch using MessagePack.

    The snapshot holds the plan, the root seed, the counters and the
    candidate trackers. Hash seeds are re-derived from the root seed on
    decode and checked against the stored fingerprint.

    Example:
        >>> blob = SketchEncoder.encode(sketch)
        >>> SketchEncoder.decode(blob).compatible(sketch)
        True
    """

    FORMAT = "symnorm.sketch"
    VERSION = 1

    @staticmethod
    def _fingerprint(sk: SampleLevelSketch) -> bytes:
        return sk.bank.row_seeds[:1].tobytes() + sk.member_seeds[:, :1].tobytes()

    @classmethod
    def encode(cls, sk: SampleLevelSketch) -> bytes:
        """
        Encode a sketch to MessagePack bytes.

        Raises:
            EncodingError: If encoding fails
        """
        try:
            bank = sk.bank
            data = {
                "format": cls.FORMAT,
                "version": cls.VERSION,
                "plan": _jsonable(sk.plan.to_dict()),
                "seed": sk.seed,
                "updates_seen": sk.updates_seen,
                "fingerprint": cls._fingerprint(sk),
                "counters": bank.counters.astype("<i8").tobytes(),
                "tracker_keys": bank.tracker_keys.astype("<i8").tobytes(),
                "tracker_est": bank.tracker_est.astype("<f8").tobytes(),
            }
            return msgpack.packb(data, use_bin_type=True)
        except Exception as e:
            raise EncodingError(f"Sketch encoding failed: {str(e)}") from e

    @classmethod
    def decode(cls, data: bytes) -> SampleLevelSketch:
        """
        Decode MessagePack bytes to a sketch.

        Raises:
            DecodingError: If the snapshot is malformed or from another format
        """
        try:
            body = msgpack.unpackb(data, raw=False, strict_map_key=False)
        except Exception as e:
            raise DecodingError(f"Sketch decoding failed: {str(e)}") from e
        if not isinstance(body, dict) or body.get("format") != cls.FORMAT:
            raise DecodingError("Not a symnorm sketch snapshot")
        if body.get("version") != cls.VERSION:
            raise DecodingError(f"Unsupported sketch snapshot version {body.get('version')}")
        try:
            sk = SampleLevelSketch(SketchPlan.from_dict(body["plan"]), int(body["seed"]))
            bank = sk.bank
            bank.counters = np.frombuffer(body["counters"], dtype="<i8").astype(np.int64).reshape(
                bank.counters.shape)
            bank.tracker_keys = np.frombuffer(body["tracker_keys"], dtype="<i8").astype(
                np.int64).reshape(bank.tracker_keys.shape)
            bank.tracker_est = np.frombuffer(body["tracker_est"], dtype="<f8").astype(
                np.float64).reshape(bank.tracker_est.shape)
            sk.updates_seen = int(body.get("updates_seen", 0))
        except Exception as e:
            raise DecodingError(f"Sketch decoding failed: {str(e)}") from e
        if cls._fingerprint(sk) != body["fingerprint"]:
            raise DecodingError("Sketch seeds do not match the snapshot fingerprint")
        return sk

    @classmethod
    def save(cls, sk: SampleLevelSketch, path: Union[str, Path]) -> None:
        Path(path).write_bytes(cls.encode(sk))

    @classmethod
    def load(cls, path: Union[str, Path]) -> SampleLevelSketch:
        try:
            data = Path(path).read_bytes()
        except OSError as e:
            raise DecodingError(f"Cannot read sketch snapshot {path}: {str(e)}") from e
        return cls.decode(data)


def write_json(obj, path: Union[str, Path]) -> None:
    Path(path).write_bytes(JSONEncoder.encode(obj))


def read_json(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        return JSONEncoder.decode(Path(path).read_bytes())
    except OSError as e:
        raise DecodingError(f"Cannot read {path}: {str(e)}") from e
