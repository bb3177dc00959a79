"""Model checkpoint serialization.

Single-file format: one JSON header line (array names and shapes, the
vocabulary hash, and free-form metadata) followed by the raw float64
little-endian bytes of every array in header order. The writer emits no
timestamps, so identical parameters produce identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .model import DenseParams, EmbeddingParams, LstmParams, ModelParams, named_arrays
from .preprocess import MutationVocabulary

_MAGIC = "oncoseq-checkpoint-v1"


def save_checkpoint(
    params: ModelParams,
    vocab: MutationVocabulary,
    path: str | Path,
    meta: dict | None = None,
) -> None:
    arrays = named_arrays(params) + [("class_weights", params.class_weights)]
    header = {
        "format": _MAGIC,
        "vocab_hash": vocab.content_hash(),
        "arrays": [{"name": n, "shape": list(a.shape)} for n, a in arrays],
        "meta": meta or {},
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        for _, arr in arrays:
            fh.write(np.ascontiguousarray(arr, dtype=np.float64).tobytes())


def load_checkpoint(
    path: str | Path, vocab: MutationVocabulary
) -> tuple[ModelParams, dict]:
    """Load parameters, validating the stored vocabulary hash against the
    supplied vocabulary."""
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        if header.get("format") != _MAGIC:
            raise ConfigError(f"not a model checkpoint: {path}")
        if header["vocab_hash"] != vocab.content_hash():
            raise ConfigError(
                "checkpoint was trained against a different vocabulary"
            )
        arrays = {}
        for entry in header["arrays"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * 8)
            if len(buf) != count * 8:
                raise ConfigError(f"truncated checkpoint: {path}")
            arrays[entry["name"]] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()

    params = ModelParams(
        embedding=EmbeddingParams(arrays["embedding"]),
        forward_lstm=LstmParams(arrays["fwd.w_x"], arrays["fwd.w_h"], arrays["fwd.b"]),
        backward_lstm=LstmParams(arrays["bwd.w_x"], arrays["bwd.w_h"], arrays["bwd.b"]),
        dense1=DenseParams(arrays["dense1.w"], arrays["dense1.b"]),
        dense2=DenseParams(arrays["dense2.w"], arrays["dense2.b"]),
        class_weights=arrays["class_weights"],
    )
    return params, header.get("meta", {})
