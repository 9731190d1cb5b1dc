"""Checkpoint container: versioned text header + named float64 arrays.

Layout: a magic line, a JSON header line (metadata plus array names and
shapes in storage order), a blank line, then the raw little-endian
float64 array payloads concatenated in header order. Round trips are
bit-exact.
"""
from __future__ import annotations

import json

import numpy as np

MAGIC = "RICHLAB-CHECKPOINT v1"


def save_checkpoint(path, metadata: dict, arrays: dict):
    """Write named float64 arrays with a metadata header."""
    order = list(arrays)
    header = dict(metadata)
    header["arrays"] = [{"name": k, "shape": list(np.shape(arrays[k]))}
                        for k in order]
    with open(path, "wb") as fh:
        fh.write((MAGIC + "\n").encode())
        fh.write((json.dumps(header) + "\n\n").encode())
        for k in order:
            arr = np.ascontiguousarray(arrays[k], dtype="<f8")
            fh.write(arr.tobytes())


def load_checkpoint(path):
    """Read back (metadata, arrays); inverse of :func:`save_checkpoint`."""
    with open(path, "rb") as fh:
        magic = fh.readline().decode().rstrip("\n")
        if magic != MAGIC:
            raise ValueError(f"not a checkpoint file (banner {magic!r})")
        header = json.loads(fh.readline().decode())
        if fh.readline() not in (b"\n", b""):
            raise ValueError("malformed checkpoint header")
        arrays = {}
        for entry in header.pop("arrays"):
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * 8)
            arrays[entry["name"]] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
    return header, arrays
