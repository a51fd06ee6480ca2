"""Flat binary archive for named float64 arrays.

Layout: magic, little-endian uint64 header length, a JSON header listing
entry names/shapes plus a string-valued metadata record, then the raw
float64 little-endian blocks in header order. Round trips are bit exact.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"DESKRL-CKPT-1\n"


class CheckpointError(Exception):
    pass


def save_archive(path, arrays: dict[str, np.ndarray], meta: dict[str, str]) -> None:
    entries = []
    blocks = []
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        entries.append({"name": name, "shape": list(arr.shape)})
        blocks.append(arr.astype("<f8").tobytes())
    header = json.dumps({"meta": {k: str(v) for k, v in meta.items()}, "entries": entries}).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<Q", len(header)))
        f.write(header)
        for block in blocks:
            f.write(block)


def load_archive(path) -> tuple[dict[str, np.ndarray], dict[str, str]]:
    raw = Path(path).read_bytes()
    if not raw.startswith(MAGIC):
        raise CheckpointError(f"{path}: not a parameter archive (bad magic)")
    off = len(MAGIC)
    if len(raw) < off + 8:
        raise CheckpointError(f"{path}: truncated header length")
    (hlen,) = struct.unpack_from("<Q", raw, off)
    off += 8
    if len(raw) < off + hlen:
        raise CheckpointError(f"{path}: truncated header")
    header = json.loads(raw[off : off + hlen].decode())
    off += hlen
    arrays = {}
    for entry in header["entries"]:
        shape = tuple(entry["shape"])
        nbytes = int(np.prod(shape, dtype=np.int64)) * 8 if shape else 8
        if len(raw) < off + nbytes:
            raise CheckpointError(f"{path}: truncated block for {entry['name']!r}")
        flat = np.frombuffer(raw, dtype="<f8", count=nbytes // 8, offset=off)
        arrays[entry["name"]] = flat.reshape(shape).astype(np.float64)
        off += nbytes
    if off != len(raw):
        raise CheckpointError(f"{path}: {len(raw) - off} trailing bytes")
    return arrays, header["meta"]
