"""Binary model file format.

    magic b"VL2E" | version u16 | tensor_count u32
    per tensor: name_len u16 | name utf8 | dtype u8 (0=f32, 1=f64) |
                rank u8 | dims u32 each | raw little-endian values

Multi-byte header fields are big-endian; tensor values little-endian.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import ModelFormatError
from .nn.autograd import Tensor
from .vl2e import ModelConfig, param_shapes

MODEL_MAGIC = b"VL2E"
MODEL_VERSION = 1

_DTYPES = {0: "<f4", 1: "<f8"}
_DTYPE_CODES = {np.dtype(np.float32): 0, np.dtype(np.float64): 1}


def save_params(params: dict[str, Tensor], path, dtype=np.float64) -> None:
    code = _DTYPE_CODES[np.dtype(dtype)]
    out = bytearray()
    out += MODEL_MAGIC
    out += struct.pack(">HI", MODEL_VERSION, len(params))
    for name in sorted(params):
        data = np.ascontiguousarray(params[name].data, dtype=_DTYPES[code])
        nb = name.encode("utf-8")
        out += struct.pack(">H", len(nb)) + nb
        out += struct.pack(">BB", code, data.ndim)
        for dim in data.shape:
            out += struct.pack(">I", dim)
        out += data.tobytes()
    Path(path).write_bytes(bytes(out))


def load_params(path, cfg: ModelConfig | None = None) -> dict[str, Tensor]:
    raw = Path(path).read_bytes()
    if len(raw) < 10 or raw[:4] != MODEL_MAGIC:
        raise ModelFormatError("bad model file magic")
    version, count = struct.unpack(">HI", raw[4:10])
    if version != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {version}")
    off = 10
    params: dict[str, Tensor] = {}
    try:
        for _ in range(count):
            (nlen,) = struct.unpack(">H", raw[off:off + 2])
            off += 2
            name = raw[off:off + nlen].decode("utf-8")
            off += nlen
            code, rank = struct.unpack(">BB", raw[off:off + 2])
            off += 2
            if code not in _DTYPES:
                raise ModelFormatError(f"unknown dtype code {code} for {name}")
            dims = struct.unpack(f">{rank}I", raw[off:off + 4 * rank])
            off += 4 * rank
            nbytes = int(np.prod(dims, dtype=np.int64)) * (4 if code == 0 else 8)
            blob = raw[off:off + nbytes]
            if len(blob) != nbytes:
                raise ModelFormatError(f"truncated tensor data for {name}")
            off += nbytes
            data = np.frombuffer(blob, dtype=_DTYPES[code]).reshape(dims)
            params[name] = Tensor(
                data.astype(np.float64), requires_grad=True, name=name
            )
    except struct.error as exc:
        raise ModelFormatError(f"truncated model file: {exc}") from exc
    if off != len(raw):
        raise ModelFormatError("trailing bytes after last tensor")
    if cfg is not None:
        expected = param_shapes(cfg)
        missing = sorted(set(expected) - set(params))
        if missing:
            raise ModelFormatError(f"missing tensors: {', '.join(missing)}")
        extra = sorted(set(params) - set(expected))
        if extra:
            raise ModelFormatError(f"unexpected tensors: {', '.join(extra)}")
        for name, shape in expected.items():
            if tuple(params[name].shape) != tuple(shape):
                raise ModelFormatError(
                    f"tensor {name} shape {params[name].shape} != {shape}"
                )
    return params
