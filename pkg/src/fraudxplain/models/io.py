"""Deterministic binary model files.

Layout (format version 1):

    b"FXM1\\n"
    8-byte big-endian header length
    header JSON (utf-8, sorted keys): {"format", "kind", "config", "arrays"}
    raw array bytes, C order, little-endian, in header order

The format deliberately avoids zip containers: re-saving an identical model
must produce identical bytes, timestamps included.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

_MAGIC = b"FXM1\n"
_FORMAT = 1


def save_model(model, path: str | Path) -> None:
    config = model.config()
    arrays = model.arrays()
    names = sorted(arrays)
    payload = []
    manifest = []
    for name in names:
        arr = np.ascontiguousarray(arrays[name])
        arr = arr.astype(arr.dtype.newbyteorder("<"), copy=False)
        manifest.append({"name": name, "dtype": arr.dtype.str, "shape": list(arr.shape)})
        payload.append(arr.tobytes())
    header = json.dumps(
        {"format": _FORMAT, "kind": model.kind, "config": config, "arrays": manifest},
        sort_keys=True,
        separators=(",", ":"),
    ).encode("utf-8")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fh:
        fh.write(_MAGIC)
        fh.write(len(header).to_bytes(8, "big"))
        fh.write(header)
        for chunk in payload:
            fh.write(chunk)


def load_model(path: str | Path):
    from . import MODEL_CLASSES

    raw = Path(path).read_bytes()
    if not raw.startswith(_MAGIC):
        raise ValueError(f"{path}: not a model file (bad magic)")
    offset = len(_MAGIC)
    header_len = int.from_bytes(raw[offset : offset + 8], "big")
    offset += 8
    header = json.loads(raw[offset : offset + header_len].decode("utf-8"))
    offset += header_len
    if header["format"] != _FORMAT:
        raise ValueError(f"{path}: unsupported format version {header['format']}")

    arrays = {}
    for entry in header["arrays"]:
        dtype = np.dtype(entry["dtype"])
        count = int(np.prod(entry["shape"], dtype=np.int64)) if entry["shape"] else 1
        nbytes = dtype.itemsize * count
        arr = np.frombuffer(raw[offset : offset + nbytes], dtype=dtype).reshape(entry["shape"])
        arrays[entry["name"]] = arr.copy()
        offset += nbytes

    kind = header["kind"]
    if kind not in MODEL_CLASSES:
        raise ValueError(f"{path}: unknown model kind {kind!r}")
    return MODEL_CLASSES[kind].from_state(header["config"], arrays)
