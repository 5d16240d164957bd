"""Exact-cosine vector index with a binary snapshot format.

Vectors are unit-norm, so cosine similarity is a dot product.  Search is
exhaustive: scores are computed in float64 over the whole index, sorted
descending with insertion order breaking ties.  Exactness over speed; the
corpora involved are thousands of chunks, not millions.

Snapshot layout, all little-endian:

    magic "AVIX" | u32 version=1 | u32 dim | u64 count
    then per record: u32 id_len | id utf-8 | u32 doc_len | doc_id utf-8
    | dim float32 components
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .embed import EmbeddingVector
from .errors import CorruptIndex, DimensionMismatch, DuplicateChunkId

MAGIC = b"AVIX"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class SearchHit:
    chunk_id: str
    doc_id: str
    score: float
    rank: int


class VectorIndex:
    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dim must be positive")
        self.dim = dim
        self._ids: list[str] = []
        self._doc_ids: list[str] = []
        self._vectors: list[np.ndarray] = []
        self._id_to_pos: dict[str, int] = {}
        self._matrix: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self._ids)

    def __eq__(self, other) -> bool:
        if not isinstance(other, VectorIndex):
            return NotImplemented
        return (
            self.dim == other.dim
            and self._ids == other._ids
            and self._doc_ids == other._doc_ids
            and len(self._vectors) == len(other._vectors)
            and all(
                a.tobytes() == b.tobytes()
                for a, b in zip(self._vectors, other._vectors)
            )
        )

    def add(self, chunk_id: str, doc_id: str, vector: EmbeddingVector) -> None:
        if not chunk_id:
            raise ValueError("chunk_id must be non-empty")
        if vector.dim != self.dim:
            raise DimensionMismatch(
                f"vector dim {vector.dim} does not match index dim {self.dim}"
            )
        if chunk_id in self._id_to_pos:
            raise DuplicateChunkId(f"chunk_id already indexed: {chunk_id}")
        self._id_to_pos[chunk_id] = len(self._ids)
        self._ids.append(chunk_id)
        self._doc_ids.append(doc_id)
        self._vectors.append(vector.values.copy())
        self._matrix = None

    def __contains__(self, chunk_id: str) -> bool:
        return chunk_id in self._id_to_pos

    def chunk_ids(self) -> list[str]:
        return list(self._ids)

    def vector_of(self, chunk_id: str) -> EmbeddingVector:
        try:
            pos = self._id_to_pos[chunk_id]
        except KeyError:
            raise KeyError(f"unknown chunk_id: {chunk_id}") from None
        return EmbeddingVector(self._vectors[pos])

    def doc_of(self, chunk_id: str) -> str:
        return self._doc_ids[self._id_to_pos[chunk_id]]

    def _scores(self, query: EmbeddingVector) -> np.ndarray:
        if self._matrix is None:
            self._matrix = np.vstack(self._vectors).astype(np.float64)
        return self._matrix @ query.values.astype(np.float64)

    def search_topk(
        self,
        query: EmbeddingVector,
        k: int,
        doc_filter: set[str] | None = None,
    ) -> list[SearchHit]:
        """Top-k by cosine score, descending; ties keep insertion order.

        doc_filter, when given, restricts candidates to those doc_ids.
        Returns fewer than k hits when fewer candidates exist; ranks are
        dense from 0.
        """
        if k < 1:
            raise ValueError("k must be positive")
        if query.dim != self.dim:
            raise DimensionMismatch(
                f"query dim {query.dim} does not match index dim {self.dim}"
            )
        if not self._ids:
            return []
        scores = self._scores(query)
        if doc_filter is not None:
            candidates = np.array(
                [i for i, d in enumerate(self._doc_ids) if d in doc_filter],
                dtype=np.int64,
            )
            if candidates.size == 0:
                return []
        else:
            candidates = np.arange(len(self._ids), dtype=np.int64)
        sub = scores[candidates]
        # descending score, then ascending insertion position
        order = np.lexsort((candidates, -sub))[:k]
        hits = []
        for rank, j in enumerate(order):
            pos = int(candidates[j])
            hits.append(
                SearchHit(
                    chunk_id=self._ids[pos],
                    doc_id=self._doc_ids[pos],
                    score=float(scores[pos]),
                    rank=rank,
                )
            )
        return hits

    # -- snapshot --------------------------------------------------------

    def save(self, path: str | Path) -> None:
        parts = [
            MAGIC,
            struct.pack("<I", FORMAT_VERSION),
            struct.pack("<I", self.dim),
            struct.pack("<Q", len(self._ids)),
        ]
        for chunk_id, doc_id, vec in zip(self._ids, self._doc_ids, self._vectors):
            cid = chunk_id.encode("utf-8")
            did = doc_id.encode("utf-8")
            parts.append(struct.pack("<I", len(cid)))
            parts.append(cid)
            parts.append(struct.pack("<I", len(did)))
            parts.append(did)
            parts.append(vec.astype("<f4").tobytes())
        Path(path).write_bytes(b"".join(parts))

    @classmethod
    def load(cls, path: str | Path) -> "VectorIndex":
        """Load a snapshot; any header, length, or truncation problem raises
        CorruptIndex with the byte offset of the failure."""
        data = Path(path).read_bytes()
        reader = _Reader(data)
        magic = reader.take(4, "magic")
        if magic != MAGIC:
            raise CorruptIndex(f"bad magic {magic!r} at byte offset 0")
        version = reader.u32("version")
        if version != FORMAT_VERSION:
            raise CorruptIndex(f"unsupported version {version} at byte offset 4")
        dim = reader.u32("dim")
        if dim < 1:
            raise CorruptIndex("non-positive dim at byte offset 8")
        count = reader.u64("count")
        index = cls(dim)
        for _ in range(count):
            cid = reader.string("chunk_id")
            did = reader.string("doc_id")
            at = reader.offset
            raw = reader.take(4 * dim, "vector")
            vec = np.frombuffer(raw, dtype="<f4").astype(np.float32)
            try:
                index.add(cid, did, EmbeddingVector(vec))
            except (ValueError, DuplicateChunkId) as exc:
                raise CorruptIndex(f"invalid record at byte offset {at}: {exc}") from exc
        if reader.offset != len(data):
            raise CorruptIndex(
                f"{len(data) - reader.offset} trailing bytes at byte offset {reader.offset}"
            )
        return index


class _Reader:
    """Cursor over snapshot bytes that reports offsets on failure."""

    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, n: int, what: str) -> bytes:
        if self.offset + n > len(self.data):
            raise CorruptIndex(
                f"truncated {what}: need {n} bytes at byte offset {self.offset}, "
                f"have {len(self.data) - self.offset}"
            )
        out = self.data[self.offset : self.offset + n]
        self.offset += n
        return out

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]

    def u64(self, what: str) -> int:
        return struct.unpack("<Q", self.take(8, what))[0]

    def string(self, what: str) -> str:
        at = self.offset
        n = self.u32(f"{what} length")
        raw = self.take(n, what)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorruptIndex(f"invalid utf-8 in {what} at byte offset {at}: {exc}") from exc


def filter_by_threshold(hits: list[SearchHit], threshold: float) -> list[SearchHit]:
    """Keep hits scoring at or above threshold, reassigning dense ranks."""
    if not -1.0 <= threshold <= 1.0:
        raise ValueError("threshold must be within [-1, 1]")
    kept = [h for h in hits if h.score >= threshold]
    return [replace(h, rank=i) for i, h in enumerate(kept)]
