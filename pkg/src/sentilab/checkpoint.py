"""Parameter checkpoints: a JSON manifest plus one binary blob.

Layout inside a checkpoint directory:

* ``manifest.json`` -- ``{"version": 1, "model_config_hash": ..., "params":
  [{"name": ..., "shape": [...]}, ...]}``
* ``params.bin`` -- the parameters' float32 values, little-endian,
  concatenated in manifest order.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict

import numpy as np

from .errors import MalformedFile

FORMAT_VERSION = 1


def save_checkpoint(directory: str | Path, arrays: Dict[str, np.ndarray], model_config_hash: str) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "version": FORMAT_VERSION,
        "model_config_hash": model_config_hash,
        "params": [{"name": name, "shape": list(arr.shape)} for name, arr in arrays.items()],
    }
    blob = b"".join(np.ascontiguousarray(arr, dtype="<f4").tobytes() for arr in arrays.values())
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    (directory / "params.bin").write_bytes(blob)


def load_checkpoint(directory: str | Path) -> tuple[Dict[str, np.ndarray], dict]:
    """Returns (name -> float32 array, manifest dict)."""
    directory = Path(directory)
    try:
        manifest = json.loads((directory / "manifest.json").read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedFile(f"unreadable checkpoint manifest in {directory}: {exc}") from exc
    if manifest.get("version") != FORMAT_VERSION:
        raise MalformedFile(f"unsupported checkpoint version {manifest.get('version')}")
    blob = (directory / "params.bin").read_bytes()
    arrays: Dict[str, np.ndarray] = {}
    offset = 0
    for entry in manifest["params"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 4
        if offset + nbytes > len(blob):
            raise MalformedFile("checkpoint blob shorter than manifest promises")
        arrays[entry["name"]] = np.frombuffer(blob[offset : offset + nbytes], dtype="<f4").reshape(shape).copy()
        offset += nbytes
    if offset != len(blob):
        raise MalformedFile("checkpoint blob longer than manifest promises")
    return arrays, manifest
