"""Recording embeddings: per-slice embedders, mean aggregation over slices,
and the sidecar file for vectors computed offline by an external model."""

from __future__ import annotations

import hashlib
import re
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, runtime_checkable

import numpy as np

from .audio import Waveform
from .errors import (
    DimensionMismatchError,
    MissingEmbeddingError,
    SidecarFormatError,
)
from .features import FRAMES_PER_PATCH, MEL_BANDS, MelPatch, patches

PATCH_FLAT_SIZE = FRAMES_PER_PATCH * MEL_BANDS  # 6144
MIN_DIMENSION = 8
DEFAULT_DIMENSION = 128


@dataclass(frozen=True)
class Embedding:
    """Fixed-length vector for a whole recording, tagged with its producer."""

    values: np.ndarray
    embedder_id: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValueError(f"embedding must be a non-empty vector, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("embedding contains non-finite entries")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def dimension(self) -> int:
        return self.values.size


@runtime_checkable
class SliceEmbedder(Protocol):
    """Anything that deterministically maps a 96x64 patch to a vector."""

    embedder_id: str
    dimension: int

    def embed_slice(self, patch: MelPatch) -> np.ndarray: ...


def embed_recording(w: Waveform, embedder: SliceEmbedder) -> Embedding:
    """Element-wise mean of the per-slice vectors over all 960 ms slices."""
    vectors = np.stack([embedder.embed_slice(p) for p in patches(w)])
    return Embedding(vectors.mean(axis=0), embedder.embedder_id)


_REFERENCE_ID_RE = re.compile(r"^reference-projection-v1:seed=(-?\d+):dim=(\d+)$")


class ReferenceProjectionEmbedder:
    """Deterministic stand-in embedder: a seeded Gaussian random projection.

    Flattens the patch time-major to 6144 values and multiplies by a fixed
    6144 x dimension matrix drawn reproducibly from the seed. Linear, so it
    exercises the whole retrieval stack without trained weights.
    """

    def __init__(self, seed: int = 0, dimension: int = DEFAULT_DIMENSION):
        if dimension < MIN_DIMENSION:
            raise ValueError(f"dimension must be >= {MIN_DIMENSION}, got {dimension}")
        rng = np.random.default_rng(seed)
        self._matrix = rng.standard_normal((PATCH_FLAT_SIZE, dimension)) / np.sqrt(PATCH_FLAT_SIZE)
        self.embedder_id = f"reference-projection-v1:seed={seed}:dim={dimension}"
        self.dimension = dimension

    def embed_slice(self, patch: MelPatch) -> np.ndarray:
        return patch.values.reshape(-1) @ self._matrix


def parse_reference_embedder_id(embedder_id: str) -> ReferenceProjectionEmbedder | None:
    """Rebuild the reference embedder encoded in an id, or None if it is not one."""
    m = _REFERENCE_ID_RE.match(embedder_id)
    if m is None:
        return None
    return ReferenceProjectionEmbedder(seed=int(m.group(1)), dimension=int(m.group(2)))


# --- sidecar store of precomputed recording vectors ---------------------------
#
# Binary layout (little-endian throughout):
#   magic     8 bytes  b"CDSIDE\x00\x01" (format version 1 in the last byte)
#   id_len    u16      length of the embedder id
#   embedder_id        id_len UTF-8 bytes
#   dimension u32
#   count     u32
#   then count records, each:
#     rid_len u16      length of the record id
#     record_id        rid_len UTF-8 bytes
#     vector           dimension float32 values

SIDECAR_MAGIC = b"CDSIDE\x00\x01"


class SidecarEmbeddings:
    """Recording-level vectors keyed by record id, bypassing slicing."""

    def __init__(self, embedder_id: str, vectors: dict[str, np.ndarray]):
        if not vectors:
            raise SidecarFormatError("sidecar holds no vectors")
        dims = {np.asarray(v).size for v in vectors.values()}
        if len(dims) != 1:
            raise DimensionMismatchError(f"inconsistent vector lengths in sidecar: {sorted(dims)}")
        self.embedder_id = embedder_id
        self.dimension = dims.pop()
        self._vectors = {
            rid: np.asarray(v, dtype=np.float64) for rid, v in vectors.items()
        }

    def __len__(self):
        return len(self._vectors)

    def __contains__(self, record_id: str) -> bool:
        return record_id in self._vectors

    def record_ids(self) -> list[str]:
        return list(self._vectors)

    def embedding_for(self, record_id: str) -> Embedding:
        if record_id not in self._vectors:
            raise MissingEmbeddingError(f"no sidecar vector for record id {record_id!r}")
        return Embedding(self._vectors[record_id], self.embedder_id)


def write_sidecar(path, embedder_id: str, vectors: dict[str, np.ndarray]) -> None:
    """Write vectors to the binary sidecar layout documented above."""
    store = SidecarEmbeddings(embedder_id, vectors)  # validates uniform dimension
    id_bytes = embedder_id.encode("utf-8")
    out = bytearray()
    out += SIDECAR_MAGIC
    out += struct.pack("<H", len(id_bytes))
    out += id_bytes
    out += struct.pack("<II", store.dimension, len(vectors))
    for rid, vec in vectors.items():
        rid_bytes = rid.encode("utf-8")
        out += struct.pack("<H", len(rid_bytes))
        out += rid_bytes
        out += np.asarray(vec, dtype="<f4").tobytes()
    Path(path).write_bytes(bytes(out))


def read_sidecar(path) -> SidecarEmbeddings:
    """Read a sidecar file back into a SidecarEmbeddings provider."""
    data = Path(path).read_bytes()
    view = memoryview(data)
    if len(view) < len(SIDECAR_MAGIC) or view[: len(SIDECAR_MAGIC)] != SIDECAR_MAGIC:
        raise SidecarFormatError("bad sidecar magic or unsupported version")
    offset = len(SIDECAR_MAGIC)

    def take(n: int, what: str) -> memoryview:
        nonlocal offset
        if offset + n > len(view):
            raise SidecarFormatError(f"sidecar truncated while reading {what}")
        chunk = view[offset : offset + n]
        offset += n
        return chunk

    (id_len,) = struct.unpack("<H", take(2, "embedder id length"))
    embedder_id = bytes(take(id_len, "embedder id")).decode("utf-8")
    dimension, count = struct.unpack("<II", take(8, "dimension/count"))
    if dimension == 0 or count == 0:
        raise SidecarFormatError(f"sidecar declares dimension={dimension}, count={count}")
    vectors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (rid_len,) = struct.unpack("<H", take(2, "record id length"))
        rid = bytes(take(rid_len, "record id")).decode("utf-8")
        vec = np.frombuffer(take(4 * dimension, f"vector for {rid!r}"), dtype="<f4")
        if rid in vectors:
            raise SidecarFormatError(f"duplicate record id in sidecar: {rid!r}")
        vectors[rid] = vec.astype(np.float64)
    if offset != len(view):
        raise SidecarFormatError(f"{len(view) - offset} trailing bytes after last vector")
    return SidecarEmbeddings(embedder_id, vectors)


class TorchScriptEmbedder:
    """Adapter for a serialized TorchScript module mapping (batch, 96, 64)
    float32 patches to (batch, dimension) vectors.

    Requires the optional torch dependency (pip install cardiag[external]).
    The id records the model file so indices remember exactly which export
    produced their vectors; pass embedder_id to pin a custom name.
    """

    def __init__(self, model_path, embedder_id: str | None = None):
        try:
            import torch
        except ImportError as exc:  # pragma: no cover - torch present in dev env
            raise RuntimeError(
                "TorchScriptEmbedder needs torch; install the 'external' extra"
            ) from exc
        self._torch = torch
        path = Path(model_path)
        self._model = torch.jit.load(str(path), map_location="cpu").eval()
        probe = torch.zeros((1, FRAMES_PER_PATCH, MEL_BANDS), dtype=torch.float32)
        with torch.no_grad():
            out = self._model(probe)
        if out.ndim != 2 or out.shape[0] != 1:
            raise ValueError(f"model must return (batch, dim), got {tuple(out.shape)}")
        self.dimension = int(out.shape[1])
        if embedder_id is None:
            digest = hashlib.sha256(path.read_bytes()).hexdigest()[:12]
            embedder_id = f"external:{path.stem}:{digest}"
        self.embedder_id = embedder_id

    def embed_slice(self, patch: MelPatch) -> np.ndarray:
        torch = self._torch
        tensor = torch.from_numpy(patch.values[None].astype(np.float32))
        with torch.no_grad():
            out = self._model(tensor)
        return out.numpy().reshape(-1).astype(np.float64)
