"""Binary model checkpoints.

Layout (all little-endian): magic "ARTC", u16 version, u32 JSON length and a
UTF-8 JSON config block (model configuration plus epoch/seed summary), then
one block per parameter: u16 name length, name bytes, u8 rank, rank u32
extents, float32 data. The block set must match the model configuration
exactly; unknown or missing blocks are rejected by name.
"""

from __future__ import annotations

import json
import struct
from typing import BinaryIO

import numpy as np

from .autodiff import Tensor
from .model import ModelConfig, ScreeningModel, parameter_shapes
from .transition import SSTParams

MAGIC = b"ARTC"
VERSION = 1
THETA_BLOCK = "sst.theta"


class CheckpointError(ValueError):
    pass


def _write_block(fh: BinaryIO, name: str, data: np.ndarray) -> None:
    encoded = name.encode("utf-8")
    fh.write(struct.pack("<H", len(encoded)))
    fh.write(encoded)
    fh.write(struct.pack("<B", data.ndim))
    fh.write(struct.pack(f"<{data.ndim}I", *data.shape))
    fh.write(np.ascontiguousarray(data, dtype="<f4").tobytes())


def save_checkpoint(
    path,
    model: ScreeningModel,
    sst: SSTParams | None = None,
    epoch: int = 0,
    seed: int = 0,
) -> None:
    if model.config.use_sst and sst is None:
        raise CheckpointError("model uses the noise transition but no SSTParams given")
    header = {"model": model.config.to_dict(), "epoch": int(epoch), "seed": int(seed)}
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", VERSION))
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for name in sorted(model.params):
            _write_block(fh, name, model.params[name].data)
        if model.config.use_sst:
            _write_block(fh, THETA_BLOCK, sst.as_array().astype(np.float32))


def _read_exact(fh: BinaryIO, n: int) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise CheckpointError("unexpected end of checkpoint")
    return buf


def load_checkpoint(path) -> tuple[ScreeningModel, SSTParams | None, int, int]:
    """Returns (model, sst_params, epoch, seed); validates the block set."""
    with open(path, "rb") as fh:
        if _read_exact(fh, 4) != MAGIC:
            raise CheckpointError("bad magic: not a checkpoint file")
        (version,) = struct.unpack("<H", _read_exact(fh, 2))
        if version != VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        (blob_len,) = struct.unpack("<I", _read_exact(fh, 4))
        try:
            header = json.loads(_read_exact(fh, blob_len).decode("utf-8"))
            config = ModelConfig.from_dict(header["model"])
            epoch = int(header["epoch"])
            seed = int(header["seed"])
        except (KeyError, ValueError, TypeError) as e:
            raise CheckpointError(f"malformed config block: {e}") from None

        blocks: dict[str, np.ndarray] = {}
        while True:
            head = fh.read(2)
            if len(head) == 0:
                break
            if len(head) != 2:
                raise CheckpointError("unexpected end of checkpoint")
            (name_len,) = struct.unpack("<H", head)
            name = _read_exact(fh, name_len).decode("utf-8")
            (rank,) = struct.unpack("<B", _read_exact(fh, 1))
            shape = struct.unpack(f"<{rank}I", _read_exact(fh, 4 * rank))
            count = int(np.prod(shape, dtype=np.int64)) if rank else 1
            data = np.frombuffer(_read_exact(fh, 4 * count), dtype="<f4").reshape(shape)
            if name in blocks:
                raise CheckpointError(f"duplicate parameter block '{name}'")
            blocks[name] = data.copy()

    expected = dict(parameter_shapes(config))
    if config.use_sst:
        expected[THETA_BLOCK] = (3,)
    unknown = sorted(set(blocks) - set(expected))
    if unknown:
        raise CheckpointError(f"unknown parameter block '{unknown[0]}'")
    missing = sorted(set(expected) - set(blocks))
    if missing:
        raise CheckpointError(f"missing parameter block '{missing[0]}'")
    for name, shape in expected.items():
        if blocks[name].shape != tuple(shape):
            raise CheckpointError(
                f"shape mismatch for block '{name}': "
                f"stored {blocks[name].shape}, expected {tuple(shape)}"
            )

    sst = None
    if config.use_sst:
        theta = blocks.pop(THETA_BLOCK).astype(np.float64)
        sst = SSTParams(float(theta[0]), float(theta[1]), float(theta[2]))
    params = {name: Tensor(arr, requires_grad=True) for name, arr in blocks.items()}
    return ScreeningModel(config, params), sst, epoch, seed
