"""Control-tag assignment for retrieved chunks.

A tag schema is a closed vocabulary with aliases.  Chunks are tagged by a
chat gateway either sentence-by-sentence (one call per sentence, results
unioned) or in one paragraph-level call.  Raw model output is normalized
hard: unknown tags dropped, aliases mapped, duplicates removed, canonical
schema order imposed.  Malformed model output contributes nothing rather
than failing the pipeline.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .corpus import Chunk
from .llm import ChatGateway, CompletionRequest, strip_code_fences

MODES = ("sentence", "paragraph")

# Trailing tokens that end with '.' but do not end a sentence.
ABBREVIATIONS = ("e.g.", "i.e.", "etc.", "cf.", "no.", "fig.")

_SENTENCE_END = frozenset(".!?")

TAGGING_SYSTEM_PROMPT = (
    "You label network-security policy text with applicable control tags. "
    "Reply with a JSON array of tag names drawn from this list and nothing else:\n"
    "{tag_list}"
)


def _is_abbreviation(text: str, dot_index: int) -> bool:
    """True when the '.' at dot_index ends a known abbreviation token."""
    start = dot_index
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    token = text[start : dot_index + 1].lower()
    for abbr in ABBREVIATIONS:
        if token == abbr:
            return True
        if token.endswith(abbr) and not token[-len(abbr) - 1].isalnum():
            # covers "(e.g." but not "config."
            return True
    return False


def split_sentences(text: str) -> list[str]:
    """Split text into trimmed sentences.

    A sentence ends at '.', '!' or '?' followed by whitespace and an
    uppercase letter, or at end of text.  Dots inside numbers ("3.5") and
    after known abbreviations do not split.  Joining the pieces with single
    spaces reproduces a whitespace-normalized input.
    """
    pieces: list[str] = []
    prev = 0
    n = len(text)
    for i, ch in enumerate(text):
        if ch not in _SENTENCE_END:
            continue
        j = i + 1
        if j < n and not text[j].isspace():
            continue
        while j < n and text[j].isspace():
            j += 1
        if j < n and not text[j].isupper():
            continue
        if ch == "." and _is_abbreviation(text, i):
            continue
        piece = text[prev : i + 1].strip()
        if piece:
            pieces.append(piece)
        prev = i + 1
    tail = text[prev:].strip()
    if tail:
        pieces.append(tail)
    return pieces


@dataclass(frozen=True)
class TagDef:
    canonical: str
    description: str
    aliases: tuple[str, ...] = ()


_NORM_WS = re.compile(r"\s+")


def _norm_tag(raw: str) -> str:
    return _NORM_WS.sub("-", raw.strip().lower())


@dataclass(frozen=True)
class TagSchema:
    schema_id: str
    tags: tuple[TagDef, ...]

    def __post_init__(self):
        if not self.tags:
            raise ValueError("tag schema must contain at least one tag")
        canonicals = [t.canonical for t in self.tags]
        for c in canonicals:
            if c != _norm_tag(c) or not c:
                raise ValueError(f"canonical tag {c!r} must be lowercase and hyphenated")
        if len(set(canonicals)) != len(canonicals):
            raise ValueError("canonical tag names must be unique")
        canonical_set = set(canonicals)
        for t in self.tags:
            for alias in t.aliases:
                normed = _norm_tag(alias)
                if normed in canonical_set and normed != t.canonical:
                    raise ValueError(
                        f"alias {alias!r} of {t.canonical!r} collides with another canonical tag"
                    )

    def canonical_names(self) -> list[str]:
        return [t.canonical for t in self.tags]

    def alias_map(self) -> dict[str, str]:
        mapping: dict[str, str] = {}
        for t in self.tags:
            mapping[t.canonical] = t.canonical
            for alias in t.aliases:
                mapping.setdefault(_norm_tag(alias), t.canonical)
        return mapping


def normalize_tags(raw_tags, schema: TagSchema) -> list[str]:
    """Map raw tag strings onto the schema: trim, lowercase, hyphenate
    whitespace, resolve aliases, drop unknowns, dedupe, order canonically."""
    mapping = schema.alias_map()
    seen = set()
    for raw in raw_tags:
        if not isinstance(raw, str):
            continue
        canonical = mapping.get(_norm_tag(raw))
        if canonical is not None:
            seen.add(canonical)
    return [c for c in schema.canonical_names() if c in seen]


def _schema_from_json(data: dict) -> TagSchema:
    tags = tuple(
        TagDef(
            canonical=entry["canonical"],
            description=entry.get("description", ""),
            aliases=tuple(entry.get("aliases", [])),
        )
        for entry in data["tags"]
    )
    return TagSchema(schema_id=data["schema_id"], tags=tags)


def load_tag_schema(path: str | Path) -> TagSchema:
    return _schema_from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def default_tag_schema() -> TagSchema:
    """The packaged network-security control vocabulary."""
    raw = resources.files("auditnet.fixtures").joinpath("tags.json").read_text("utf-8")
    return _schema_from_json(json.loads(raw))


@dataclass(frozen=True)
class TagResult:
    chunk_id: str
    mode: str
    tags: tuple[str, ...]
    raw_responses: tuple[str, ...]


def _render_tag_list(schema: TagSchema) -> str:
    return "\n".join(f"- {t.canonical}: {t.description}" for t in schema.tags)


def _parse_tag_response(raw: str) -> list[str]:
    try:
        data = json.loads(strip_code_fences(raw))
    except (ValueError, TypeError):
        return []
    if not isinstance(data, list):
        return []
    return [item for item in data if isinstance(item, str)]


def tag_chunk(
    chunk: Chunk,
    schema: TagSchema,
    mode: str,
    gateway: ChatGateway,
) -> TagResult:
    """Tag one chunk via the gateway in the given mode.

    Sentence mode issues one call per sentence and unions the results;
    paragraph mode issues a single call.  Gateway errors propagate;
    malformed responses yield no tags.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    system_prompt = TAGGING_SYSTEM_PROMPT.format(tag_list=_render_tag_list(schema))
    texts = split_sentences(chunk.text) if mode == "sentence" else [chunk.text]
    raw_responses: list[str] = []
    collected: list[str] = []
    for text in texts:
        raw = gateway.complete(
            CompletionRequest(system_prompt=system_prompt, user_prompt=text, temperature=0.0)
        )
        raw_responses.append(raw)
        collected.extend(_parse_tag_response(raw))
    return TagResult(
        chunk_id=chunk.chunk_id,
        mode=mode,
        tags=tuple(normalize_tags(collected, schema)),
        raw_responses=tuple(raw_responses),
    )
