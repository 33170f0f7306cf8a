"""Versioned binary model container.

Byte layout (all integers little-endian):

    offset  size  field
    0       8     magic b"MSTATECL"
    8       2     format version (uint16, currently 1)
    10      2     reserved, zero
    12      4     header length L (uint32)
    16      L     header: UTF-8 JSON, sorted keys {"kind", "input_mode", "meta"}
    ..      4     normalization dimension D (uint32)
    ..      8D    means (float64)
    ..      8D    standard deviations (float64)
    ..      D     zero-variance flags (uint8)
    ..      4     array count A (uint32)
    then A records:
            2     name length (uint16), then the UTF-8 name
            1     dtype string length (uint8), then the numpy dtype string ('<f8', '<i8')
            1     ndim (uint8), then ndim x uint64 shape
            ..    raw C-order bytes
    last    4     CRC-32 of every preceding byte
"""
from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from ..errors import FormatError, VersionError
from ..features import NormalizationStats

MAGIC = b"MSTATECL"
FORMAT_VERSION = 1


def _model_types():
    from .baseline import RandomModel
    from .cnn import CnnModel
    from .gbt import GbtModel
    from .mlp import MlpModel
    from .svm import SvmModel

    return {cls.kind: cls for cls in (SvmModel, MlpModel, CnnModel, GbtModel, RandomModel)}


def dumps(model, version: int = FORMAT_VERSION) -> bytes:
    meta, arrays = model.get_state()
    header = json.dumps(
        {"kind": model.kind, "input_mode": model.input_mode, "meta": meta}, sort_keys=True
    ).encode("utf-8")
    norm = model.normalizer
    parts = [MAGIC, struct.pack("<HHI", version, 0, len(header)), header]
    dim = len(norm.mean)
    parts.append(struct.pack("<I", dim))
    parts += [np.asarray(norm.mean, "<f8").tobytes(), np.asarray(norm.std, "<f8").tobytes(),
              np.asarray(norm.flagged, "u1").tobytes()]
    parts.append(struct.pack("<I", len(arrays)))
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name])
        arr = arr.astype(arr.dtype.newbyteorder("<"), copy=False)
        bname, dt = name.encode("utf-8"), arr.dtype.str.encode("ascii")
        parts += [struct.pack("<H", len(bname)), bname, struct.pack("<B", len(dt)), dt,
                  struct.pack("<B", arr.ndim), struct.pack(f"<{arr.ndim}Q", *arr.shape), arr.tobytes()]
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError("model file is truncated")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def loads(data: bytes):
    if len(data) < 16 or data[:8] != MAGIC:
        raise FormatError("not a model file (bad magic bytes)")
    version = struct.unpack("<H", data[8:10])[0]
    if version != FORMAT_VERSION:
        raise VersionError(version, FORMAT_VERSION)
    if len(data) < 20:
        raise FormatError("model file is truncated")
    body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) != crc:
        raise FormatError("model file is truncated or corrupt (checksum mismatch)")
    r = _Reader(body)
    r.take(8)
    _, _, hlen = r.unpack("<HHI")
    try:
        header = json.loads(r.take(hlen).decode("utf-8"))
        (dim,) = r.unpack("<I")
        mean = np.frombuffer(r.take(8 * dim), "<f8").astype(np.float64)
        std = np.frombuffer(r.take(8 * dim), "<f8").astype(np.float64)
        flagged = np.frombuffer(r.take(dim), "u1").astype(bool)
        (count,) = r.unpack("<I")
        arrays = {}
        for _ in range(count):
            (nlen,) = r.unpack("<H")
            name = r.take(nlen).decode("utf-8")
            (dlen,) = r.unpack("<B")
            dtype = np.dtype(r.take(dlen).decode("ascii"))
            (ndim,) = r.unpack("<B")
            shape = r.unpack(f"<{ndim}Q")
            size = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
            arrays[name] = np.frombuffer(r.take(size), dtype).reshape(shape).astype(dtype.newbyteorder("="))
        cls = _model_types()[header["kind"]]
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"model file is corrupt ({exc})")
    if r.pos != len(body):
        raise FormatError("model file has trailing bytes")
    return cls.from_state(header["meta"], arrays, NormalizationStats(mean, std, flagged))


def save(model, path) -> None:
    Path(path).write_bytes(dumps(model))


def load(path):
    return loads(Path(path).read_bytes())
