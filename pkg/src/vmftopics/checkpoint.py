"""Versioned binary checkpoints.

Layout (little-endian): magic "VMFC", version u32 = 1, r u32, r' u32,
K u32, d_a u32, kappa f64, seed u64, encoder layer count u32 followed by
(n_in u32, n_out u32) per layer, the same for the decoder, then all arrays
as float64 in a fixed order: encoder W/b per layer, decoder W/b per layer,
topic matrix, attention W, b, v. Write-then-reload is bit-identical.
"""

from __future__ import annotations

import struct

import numpy as np

from .attention import AttentionParams
from .errors import FormatError
from .latent import LatentModel, Mlp

MAGIC = b"VMFC"
VERSION = 1
_HEADER = struct.Struct("<4sIIIIIdQ")


def _write_array(fh, arr: np.ndarray) -> None:
    fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


class _Reader:
    def __init__(self, blob):
        self.blob = blob
        self.offset = 0

    def unpack(self, fmt):
        st = struct.Struct(fmt)
        if self.offset + st.size > len(self.blob):
            raise FormatError("truncated checkpoint", offset=self.offset)
        vals = st.unpack_from(self.blob, self.offset)
        self.offset += st.size
        return vals

    def array(self, shape):
        n = int(np.prod(shape))
        nbytes = 8 * n
        if self.offset + nbytes > len(self.blob):
            raise FormatError("truncated checkpoint array", offset=self.offset)
        arr = np.frombuffer(self.blob, dtype="<f8", count=n,
                            offset=self.offset).reshape(shape).copy()
        self.offset += nbytes
        return arr


def save_checkpoint(path, model: LatentModel, attention: AttentionParams,
                    seed: int) -> None:
    d_a = attention.dim
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, model.dim_in, model.dim_latent,
                              model.n_topics, d_a, float(model.kappa),
                              int(seed)))
        for mlp in (model.encoder, model.decoder):
            fh.write(struct.pack("<I", mlp.n_layers))
            for w in mlp.weights:
                fh.write(struct.pack("<II", w.shape[0], w.shape[1]))
        for mlp in (model.encoder, model.decoder):
            for w, b in zip(mlp.weights, mlp.biases):
                _write_array(fh, w)
                _write_array(fh, b)
        _write_array(fh, model.topics)
        _write_array(fh, attention.W)
        _write_array(fh, attention.b)
        _write_array(fh, attention.v)


def load_checkpoint(path):
    """Returns (model, attention, seed)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    rd = _Reader(blob)
    magic, version, r, r_prime, k, d_a, kappa, seed = rd.unpack("<4sIIIIIdQ")
    if magic != MAGIC:
        raise FormatError("bad checkpoint magic", offset=0)
    if version != VERSION:
        raise FormatError(f"unsupported checkpoint version {version}", offset=4)

    shapes = []
    for _ in range(2):
        (n_layers,) = rd.unpack("<I")
        layer_shapes = []
        for _ in range(n_layers):
            n_in, n_out = rd.unpack("<II")
            layer_shapes.append((n_in, n_out))
        shapes.append(layer_shapes)

    mlps = []
    for layer_shapes in shapes:
        weights, biases = [], []
        for shape in layer_shapes:
            weights.append(rd.array(shape))
            biases.append(rd.array((shape[1],)))
        mlps.append(Mlp(weights, biases))
    topics = rd.array((k, r_prime))
    attn = AttentionParams(W=rd.array((d_a, r)), b=rd.array((d_a,)),
                           v=rd.array((d_a,)))
    if rd.offset != len(blob):
        raise FormatError("trailing bytes in checkpoint", offset=rd.offset)

    encoder, decoder = mlps
    if encoder.dims[0] != r or encoder.dims[-1] != r_prime:
        raise FormatError("encoder dimensions disagree with header", offset=8)
    if decoder.dims[0] != r_prime or decoder.dims[-1] != r:
        raise FormatError("decoder dimensions disagree with header", offset=8)
    model = LatentModel(encoder=encoder, decoder=decoder, topics=topics,
                        kappa=float(kappa))
    return model, attn, int(seed)
