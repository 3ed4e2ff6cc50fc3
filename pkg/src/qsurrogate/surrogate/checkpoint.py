"""Binary checkpoint format for trained surrogates.

Layout: magic "QSM1", uint32 format version, uint64 header length, JSON
header (config, family, target kind, normalization, tensor name order),
then each tensor as uint32 name length, name bytes, uint64 element count,
and raw little-endian float64 data.  Loading rebuilds the network from the
config and validates every tensor name and shape against it.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from ..codec import FeatureKind
from .model import EncoderDecoderRegressor, ModelConfig, SurrogateModel

MAGIC = b"QSM1"
FORMAT_VERSION = 1


def save_model(model: SurrogateModel, path) -> None:
    names = [name for name, _, _ in model.net.tensors()]
    header = {
        "version": FORMAT_VERSION,
        "config": model.config.to_dict(),
        "family": model.family,
        "target_kind": model.target_kind.value,
        "normalization": {
            "input_mean": model.input_mean.tolist(),
            "input_scale": model.input_scale.tolist(),
            "target_mean": model.target_mean.tolist(),
            "target_scale": model.target_scale.tolist(),
        },
        "tensors": names,
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for name, p, _ in model.net.tensors():
            nb = name.encode("utf-8")
            fh.write(struct.pack("<I", len(nb)))
            fh.write(nb)
            fh.write(struct.pack("<Q", p.size))
            fh.write(np.ascontiguousarray(p, dtype="<f8").tobytes())


def load_model(path) -> SurrogateModel:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValueError(f"{path} is not a surrogate checkpoint")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        config = ModelConfig.from_dict(header["config"])
        net = EncoderDecoderRegressor(config, np.random.default_rng(config.seed))
        expected = {name: p for name, p, _ in net.tensors()}
        seen = set()
        for _ in header["tensors"]:
            (nlen,) = struct.unpack("<I", fh.read(4))
            name = fh.read(nlen).decode("utf-8")
            (count,) = struct.unpack("<Q", fh.read(8))
            data = np.frombuffer(fh.read(count * 8), dtype="<f8")
            if name not in expected:
                raise ValueError(f"checkpoint tensor {name!r} not part of this architecture")
            p = expected[name]
            if count != p.size:
                raise ValueError(f"tensor {name!r} has {count} values, config implies {p.size}")
            p[...] = data.reshape(p.shape)
            seen.add(name)
        missing = set(expected) - seen
        if missing:
            raise ValueError(f"checkpoint is missing tensors: {sorted(missing)}")
    norm = header["normalization"]
    net.set_input_stats(np.asarray(norm["input_mean"], dtype=float), np.asarray(norm["input_scale"], dtype=float))
    return SurrogateModel(
        config=config,
        net=net,
        family=header["family"],
        target_kind=FeatureKind(header["target_kind"]),
        input_mean=np.asarray(norm["input_mean"], dtype=float),
        input_scale=np.asarray(norm["input_scale"], dtype=float),
        target_mean=np.asarray(norm["target_mean"], dtype=float),
        target_scale=np.asarray(norm["target_scale"], dtype=float),
    )
