"""Retrieval of policy controls for a confirmed interpretation.

The query embedding is built from the confirmed slot values, searched
against the chunk index (restricted to the named standard's documents
when one is known), and filtered by a per-document similarity threshold.
Thresholds are calibrated from labeled (query, chunk, relevant) examples
by exhaustive F1 maximization over the observed scores.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .corpus import CorpusStore
from .embed import EmbedProviderConfig, embed_texts
from .errors import DegenerateLabels, EmptyIndex
from .interpreter import Interpretation
from .vindex import VectorIndex

DEFAULT_THRESHOLD = 0.30
EXCERPT_CHARS = 400
DEFAULT_K = 8


@dataclass(frozen=True)
class PolicyFinding:
    """One retrieved chunk judged relevant to the interpreted query."""

    chunk_id: str
    doc_id: str
    heading_path: tuple[str, ...]
    excerpt: str
    score: float
    control_id: str | None

    def to_json(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "doc_id": self.doc_id,
            "heading_path": list(self.heading_path),
            "excerpt": self.excerpt,
            "score": self.score,
            "control_id": self.control_id,
        }


@dataclass
class ThresholdTable:
    default_threshold: float = DEFAULT_THRESHOLD
    per_doc: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for t in [self.default_threshold, *self.per_doc.values()]:
            if not -1.0 <= t <= 1.0:
                raise ValueError("thresholds must be within [-1, 1]")

    def threshold_for(self, doc_id: str) -> float:
        return self.per_doc.get(doc_id, self.default_threshold)

    def to_json(self) -> dict:
        return {"default_threshold": self.default_threshold, "per_doc": dict(self.per_doc)}


def load_thresholds(path: str | Path) -> ThresholdTable:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return ThresholdTable(
        default_threshold=data.get("default_threshold", DEFAULT_THRESHOLD),
        per_doc={k: float(v) for k, v in data.get("per_doc", {}).items()},
    )


def save_thresholds(table: ThresholdTable, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(table.to_json(), indent=2) + "\n", encoding="utf-8"
    )


def build_query_text(interpretation: Interpretation) -> str:
    """Join non-null slots (policy, subject, standard order) into the
    retrieval query; falls back to the raw question when all slots are null."""
    if interpretation.status != "confirmed":
        raise ValueError("retrieval requires a confirmed interpretation")
    parts = [
        v
        for v in (interpretation.policy, interpretation.subject, interpretation.standard)
        if v
    ]
    return " ".join(parts) if parts else interpretation.query_text


_CONTROL_ID = re.compile(r"^(\d+(?:\.\d+)*)(?=\s|$)")


def parse_control_id(heading_path) -> str | None:
    """Deepest leading section number in the heading path, if any."""
    for heading in reversed(tuple(heading_path)):
        m = _CONTROL_ID.match(heading)
        if m:
            return m.group(1)
    return None


def retrieve(
    interpretation: Interpretation,
    index: VectorIndex,
    store: CorpusStore,
    embed_config: EmbedProviderConfig,
    thresholds: ThresholdTable | None = None,
    k: int = DEFAULT_K,
) -> list[PolicyFinding]:
    """Top-k chunks above their document's threshold, best first.

    A confirmed standard slot narrows the search to documents of that
    standard when any exist; otherwise the whole index is searched.
    """
    if len(index) == 0:
        raise EmptyIndex("retrieval requires a non-empty index")
    thresholds = thresholds if thresholds is not None else ThresholdTable()
    query_text = build_query_text(interpretation)
    [query_vec] = embed_texts([query_text], embed_config)
    doc_filter = None
    if interpretation.standard:
        wanted = interpretation.standard.lower()
        matching = {
            d.doc_id
            for d in store.manifest.documents
            if d.standard_name.lower() == wanted
        }
        if matching:
            doc_filter = matching
    findings = []
    for hit in index.search_topk(query_vec, k, doc_filter=doc_filter):
        if hit.score < thresholds.threshold_for(hit.doc_id):
            continue
        chunk = store.chunk_by_id(hit.chunk_id)
        findings.append(
            PolicyFinding(
                chunk_id=chunk.chunk_id,
                doc_id=chunk.doc_id,
                heading_path=chunk.heading_path,
                excerpt=chunk.text[:EXCERPT_CHARS],
                score=hit.score,
                control_id=parse_control_id(chunk.heading_path),
            )
        )
    return findings


def calibrate_threshold(labeled) -> float:
    """Threshold maximizing F1 over labeled (score, relevant) pairs.

    Candidate thresholds are the distinct observed scores; a chunk is
    predicted relevant when score >= threshold.  F1 is compared exactly
    (rational arithmetic); ties go to the smallest threshold.
    """
    labeled = [(float(s), bool(r)) for s, r in labeled]
    n_relevant = sum(1 for _, r in labeled if r)
    if n_relevant == 0 or n_relevant == len(labeled):
        raise DegenerateLabels(
            "calibration needs at least one relevant and one irrelevant example"
        )
    best_t: float | None = None
    best_f1: Fraction | None = None
    for t in sorted({s for s, _ in labeled}):
        tp = sum(1 for s, r in labeled if r and s >= t)
        fp = sum(1 for s, r in labeled if not r and s >= t)
        fn = n_relevant - tp
        f1 = Fraction(2 * tp, 2 * tp + fp + fn)
        if best_f1 is None or f1 > best_f1:
            best_f1 = f1
            best_t = t
    return best_t


def f1_at_threshold(labeled, threshold: float) -> float:
    tp = sum(1 for s, r in labeled if r and s >= threshold)
    fp = sum(1 for s, r in labeled if not r and s >= threshold)
    fn = sum(1 for s, r in labeled if r and s < threshold)
    denom = 2 * tp + fp + fn
    return (2 * tp / denom) if denom else 0.0
