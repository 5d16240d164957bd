"""Text embeddings: remote provider client plus a deterministic offline mock.

The mock derives each token's vector from an FNV-1a hash fed through a
splitmix64 stream, sums token vectors, and unit-normalizes.  It is pure
arithmetic on fixed-width integers and IEEE floats, so the same text gives
bit-identical vectors on any machine or process.  Remote embeddings are
re-normalized locally so both paths guarantee unit norm.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np

from ._hashing import fnv1a64, splitmix64, unit_interval
from .errors import DimensionMismatch, EmptyText

if TYPE_CHECKING:
    import httpx

DEFAULT_DIM = 64
DEFAULT_MAX_BATCH = 64
NORM_TOLERANCE = 1e-6

PROVIDER_KINDS = ("mock", "remote")


class EmbeddingVector:
    """A unit-norm float32 vector.

    Construction validates shape and norm; use ``normalized`` to build one
    from arbitrary values.
    """

    __slots__ = ("values",)

    def __init__(self, values):
        arr = np.asarray(values, dtype=np.float32)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("embedding must be a non-empty 1-D vector")
        norm = float(np.linalg.norm(arr.astype(np.float64)))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"embedding norm {norm} is not within {NORM_TOLERANCE} of 1")
        self.values = arr

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    def tolist(self) -> list[float]:
        return [float(v) for v in self.values]

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmbeddingVector):
            return NotImplemented
        return self.values.tobytes() == other.values.tobytes()

    def __hash__(self):
        return hash(self.values.tobytes())

    def __repr__(self) -> str:
        return f"EmbeddingVector(dim={self.dim})"


def normalized(values) -> EmbeddingVector:
    """L2-normalize arbitrary values (in float64) into an EmbeddingVector."""
    arr = np.asarray(values, dtype=np.float64)
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return EmbeddingVector((arr / norm).astype(np.float32))


@dataclass(frozen=True)
class EmbedProviderConfig:
    kind: str = "mock"
    endpoint_url: str = ""
    model_name: str = "mock-embed"
    api_key: str = ""
    dim: int = DEFAULT_DIM
    timeout_ms: int = 30_000
    max_batch: int = DEFAULT_MAX_BATCH

    def __post_init__(self):
        if self.kind not in PROVIDER_KINDS:
            raise ValueError(f"kind must be one of {PROVIDER_KINDS}")
        if self.kind == "remote" and not self.endpoint_url:
            raise ValueError("remote embedding provider requires endpoint_url")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.max_batch < 1:
            raise ValueError("max_batch must be positive")


@lru_cache(maxsize=65536)
def _token_vector(token: str, dim: int) -> np.ndarray:
    seed = fnv1a64(token.encode("utf-8"))
    stream = splitmix64(seed)
    return np.array([unit_interval(next(stream)) for _ in range(dim)], dtype=np.float64)


def mock_embedding(text: str, dim: int = DEFAULT_DIM) -> EmbeddingVector:
    """Deterministic embedding: hash-seeded token vectors, summed and normalized.

    Tokens are whitespace-separated runs of the lowercased text.  The sum
    is accumulated in float64, the squared norm with exact summation
    (math.fsum), and the result rounded to float32, so the output is
    bit-stable across processes and platforms.  A zero sum falls back to
    the first basis vector.
    """
    acc = np.zeros(dim, dtype=np.float64)
    for token in text.lower().split():
        acc += _token_vector(token, dim)
    if not np.any(acc):
        basis = np.zeros(dim, dtype=np.float64)
        basis[0] = 1.0
        acc = basis
    norm = math.sqrt(math.fsum(float(v) * float(v) for v in acc))
    return EmbeddingVector((acc / norm).astype(np.float32))


def _remote_embed(
    texts: Sequence[str],
    config: EmbedProviderConfig,
    client: "httpx.Client",
    sleep: Callable[[float], None],
) -> list[EmbeddingVector]:
    from .llm import post_json

    headers = {}
    if config.api_key:
        headers["Authorization"] = f"Bearer {config.api_key}"
    out: list[EmbeddingVector] = []
    expected_dim: int | None = None
    for start in range(0, len(texts), config.max_batch):
        batch = list(texts[start : start + config.max_batch])
        payload = {"model": config.model_name, "input": batch}
        body = post_json(client, config.endpoint_url, payload, headers, sleep=sleep)
        try:
            rows = sorted(body["data"], key=lambda r: r["index"])
            vectors = [row["embedding"] for row in rows]
        except (KeyError, TypeError) as exc:
            raise DimensionMismatch(f"malformed embedding response: {exc}") from exc
        if len(vectors) != len(batch):
            raise DimensionMismatch(
                f"provider returned {len(vectors)} embeddings for {len(batch)} inputs"
            )
        for vec in vectors:
            if expected_dim is None:
                expected_dim = len(vec)
            elif len(vec) != expected_dim:
                raise DimensionMismatch(
                    f"provider returned dim {len(vec)}, expected {expected_dim}"
                )
            out.append(normalized(vec))
    return out


def embed_texts(
    texts: Sequence[str],
    config: EmbedProviderConfig,
    *,
    client: "httpx.Client | None" = None,
    sleep: Callable[[float], None] = time.sleep,
) -> list[EmbeddingVector]:
    """Embed texts in order; all results are unit-norm and share one dim."""
    for i, t in enumerate(texts):
        if not t or not t.strip():
            raise EmptyText(i)
    if config.kind == "mock":
        return [mock_embedding(t, config.dim) for t in texts]
    if client is not None:
        return _remote_embed(texts, config, client, sleep)
    import httpx

    with httpx.Client(timeout=config.timeout_ms / 1000.0) as owned:
        return _remote_embed(texts, config, owned, sleep)
