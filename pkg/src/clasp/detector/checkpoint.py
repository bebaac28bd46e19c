"""Model checkpoint: magic bytes, JSON header, float32 weight payload."""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import InvalidInput
from .model import DetectorModel

MAGIC = b"CLSPDET1"


def save_model(model: DetectorModel, path: str | Path) -> None:
    header = {
        "format": 1,
        "category": model.category,
        "frames_per_input": model.frames_per_input,
        "embed_dim": model.embed_dim,
        "patch_size": model.patch_size,
        "resolution": model.resolution,
        "mask_token": model.mask_token,
        "input_scale": model.input_scale,
        "input_transform": model.input_transform,
        "weights": {name: list(model.weights[name].shape) for name in model.WEIGHT_ORDER},
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for name in model.WEIGHT_ORDER:
            fh.write(np.ascontiguousarray(model.weights[name], dtype="<f4").tobytes())


def load_model(path: str | Path) -> DetectorModel:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise InvalidInput(f"{path}: not a detector checkpoint (bad magic)")
    (header_len,) = struct.unpack("<I", data[8:12])
    header = json.loads(data[12 : 12 + header_len].decode("utf-8"))
    if header.get("format") != 1:
        raise InvalidInput(f"{path}: unsupported checkpoint format {header.get('format')}")
    offset = 12 + header_len
    weights = {}
    for name in DetectorModel.WEIGHT_ORDER:
        shape = tuple(header["weights"][name])
        size = int(np.prod(shape)) * 4
        weights[name] = (
            np.frombuffer(data[offset : offset + size], dtype="<f4").reshape(shape).copy()
        )
        offset += size
    if offset != len(data):
        raise InvalidInput(f"{path}: trailing bytes in checkpoint")
    model = DetectorModel(
        category=header["category"],
        frames_per_input=header["frames_per_input"],
        embed_dim=header["embed_dim"],
        weights=weights,
        patch_size=header["patch_size"],
        resolution=header["resolution"],
        mask_token=header["mask_token"],
        input_scale=header.get("input_scale", 1.0),
        input_transform=header.get("input_transform", "linear"),
    )
    model._finalize()
    return model
