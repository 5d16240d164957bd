"""Percentile-bounded chunking of parsed sections.

Chunk size is not fixed: the limit is a percentile (default 75th, nearest
rank) of the corpus's own normalized section lengths, clamped to a sane
range.  Most sections then pass through whole; long ones are greedily
packed by paragraph, paragraphs too long are packed by sentence, and only
a sentence with no usable whitespace is ever hard-cut.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .corpus import Chunk, Section, chunk_id_for
from .errors import EmptyCorpus
from .tagger import split_sentences

MIN_CHUNK_LIMIT = 200


@dataclass(frozen=True)
class SplitterConfig:
    percentile: float = 0.75
    hard_max_chars: int = 8000
    paragraph_separator: str = "\n\n"

    def __post_init__(self):
        if not 0.0 < self.percentile <= 1.0:
            raise ValueError("percentile must be in (0, 1]")
        if self.hard_max_chars < MIN_CHUNK_LIMIT:
            raise ValueError(f"hard_max_chars must be at least {MIN_CHUNK_LIMIT}")
        if not self.paragraph_separator:
            raise ValueError("paragraph_separator must be non-empty")


_PARAGRAPH_BREAK = re.compile(r"\n\s*\n")
_WS_RUN = re.compile(r"\s+")


def normalize_text(text: str, separator: str = "\n\n") -> str:
    """Collapse whitespace per paragraph and rejoin.

    Paragraphs are blank-line separated.  Within each, whitespace runs
    become single spaces and edges are trimmed; empty paragraphs vanish.
    Idempotent when the separator is a paragraph break.
    """
    paragraphs = []
    for part in _PARAGRAPH_BREAK.split(text):
        flat = _WS_RUN.sub(" ", part).strip()
        if flat:
            paragraphs.append(flat)
    return separator.join(paragraphs)


def section_lengths(sections, config: SplitterConfig = SplitterConfig()) -> list[int]:
    """Normalized body length of each section, empty bodies included as 0."""
    return [
        len(normalize_text(s.body, config.paragraph_separator)) for s in sections
    ]


def chunk_limit(lengths, config: SplitterConfig = SplitterConfig()) -> int:
    """Nearest-rank percentile of lengths, clamped to [MIN_CHUNK_LIMIT, hard_max_chars].

    Nearest rank: with lengths sorted ascending, take the value at index
    ceil(percentile * n) - 1.
    """
    lengths = list(lengths)
    if not lengths:
        raise EmptyCorpus("chunk_limit needs at least one section length")
    ordered = sorted(lengths)
    idx = math.ceil(config.percentile * len(ordered)) - 1
    value = ordered[idx]
    return min(max(value, MIN_CHUNK_LIMIT), config.hard_max_chars)


def _hard_wrap(sentence: str, limit: int) -> list[str]:
    """Cut an oversized whitespace-poor sentence at the last space before
    the limit, or mid-word when there is none."""
    out = []
    rest = sentence
    while len(rest) > limit:
        window = rest[:limit]
        cut = -1
        for i in range(len(window) - 1, 0, -1):
            if window[i].isspace():
                cut = i
                break
        if cut <= 0:
            out.append(rest[:limit])
            rest = rest[limit:]
        else:
            out.append(rest[:cut])
            rest = rest[cut + 1 :]
    if rest:
        out.append(rest)
    return out


def _pack_units(units: list[str], joiner: str, limit: int) -> list[str]:
    """Greedy accumulation: add the next unit while the joined length fits."""
    out: list[str] = []
    current: list[str] = []
    current_len = 0
    for unit in units:
        candidate = current_len + len(joiner) + len(unit) if current else len(unit)
        if candidate <= limit:
            current.append(unit)
            current_len = candidate
        else:
            if current:
                out.append(joiner.join(current))
            current = [unit]
            current_len = len(unit)
    if current:
        out.append(joiner.join(current))
    return out


def _split_paragraph(paragraph: str, limit: int) -> list[str]:
    units: list[str] = []
    for sentence in split_sentences(paragraph):
        if len(sentence) <= limit:
            units.append(sentence)
        else:
            units.extend(_hard_wrap(sentence, limit))
    return _pack_units(units, " ", limit)


def _pack_block(block: str, limit: int, separator: str) -> list[str]:
    out: list[str] = []
    current: list[str] = []
    current_len = 0

    def flush():
        nonlocal current, current_len
        if current:
            out.append(separator.join(current))
            current = []
            current_len = 0

    for paragraph in block.split(separator):
        if len(paragraph) > limit:
            # oversized paragraph: close the open chunk, split by sentence
            flush()
            out.extend(_split_paragraph(paragraph, limit))
            continue
        candidate = (
            current_len + len(separator) + len(paragraph) if current else len(paragraph)
        )
        if candidate <= limit:
            current.append(paragraph)
            current_len = candidate
        else:
            flush()
            current = [paragraph]
            current_len = len(paragraph)
    flush()
    return out


def split_document(
    sections,
    limit: int,
    config: SplitterConfig = SplitterConfig(),
) -> list[Chunk]:
    """Chunk sections under the given limit.

    Sections at or under the limit become single chunks.  Longer ones pack
    greedily by paragraph, then by sentence, hard-cutting only inside
    whitespace-free runs.  Chunk text is normalized; empty sections yield
    no chunks.  Every chunk except unbreakable hard cuts is <= limit.
    """
    if limit < MIN_CHUNK_LIMIT:
        raise ValueError(f"limit must be at least {MIN_CHUNK_LIMIT}")
    sep = config.paragraph_separator
    chunks: list[Chunk] = []
    for section in sections:
        block = normalize_text(section.body, sep)
        if not block:
            continue
        parts = [block] if len(block) <= limit else _pack_block(block, limit, sep)
        for part_index, text in enumerate(parts):
            chunks.append(
                Chunk(
                    chunk_id=chunk_id_for(section.doc_id, section.section_seq, part_index),
                    doc_id=section.doc_id,
                    heading_path=section.heading_path,
                    part_index=part_index,
                    text=text,
                    char_len=len(text),
                )
            )
    return chunks


@dataclass(frozen=True)
class LengthHistogram:
    bucket_edges: tuple[float, ...]
    counts: tuple[int, ...]
    n_sections: int

    def to_json(self) -> dict:
        return {
            "bucket_edges": list(self.bucket_edges),
            "counts": list(self.counts),
            "n_sections": self.n_sections,
        }


def length_histogram(lengths, n_buckets: int = 20) -> LengthHistogram:
    """Equal-width histogram over section lengths.

    Edges span [min, max] in n_buckets equal steps (width 1 when all
    lengths coincide); the top edge is inclusive.  Counts sum to the
    number of lengths.
    """
    lengths = list(lengths)
    if not lengths:
        raise EmptyCorpus("length_histogram needs at least one length")
    if n_buckets < 1:
        raise ValueError("n_buckets must be positive")
    lo = float(min(lengths))
    hi = float(max(lengths))
    span = hi - lo
    if span == 0.0:
        span = 1.0
    edges = tuple(lo + span * i / n_buckets for i in range(n_buckets + 1))
    counts = [0] * n_buckets
    for v in lengths:
        idx = int((v - lo) / span * n_buckets)
        if idx >= n_buckets:
            idx = n_buckets - 1
        counts[idx] += 1
    return LengthHistogram(
        bucket_edges=edges, counts=tuple(counts), n_sections=len(lengths)
    )
