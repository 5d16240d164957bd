"""Corpus data model and on-disk persistence.

A corpus directory holds:

- ``manifest.json``: document metadata, chunk count, known standard names.
- ``chunks.jsonl``: one JSON record per chunk.
- ``docs/<doc_id>.txt``: raw registered content, byte-exact.

Document ids are derived from an FNV-1a 64-bit hash of title and standard
name, so re-ingesting the same document is idempotent and ids are stable
across machines.  The store is single-writer, multi-reader: callers
serialize mutations; all returned values are immutable.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from ._hashing import fnv1a64
from .errors import CorruptManifest, EmptyContent

SCHEMA_VERSION = 1
FORMATS = ("plaintext", "markdown")

_MANIFEST_FILE = "manifest.json"
_CHUNKS_FILE = "chunks.jsonl"
_DOCS_DIR = "docs"


@dataclass(frozen=True)
class SourceDocument:
    """A registered standards document, unsplit."""

    doc_id: str
    title: str
    standard_name: str
    format: str
    content: str
    ingested_at: datetime


@dataclass(frozen=True)
class DocumentInfo:
    """SourceDocument metadata without the content payload."""

    doc_id: str
    title: str
    standard_name: str
    format: str
    ingested_at: datetime


@dataclass(frozen=True)
class Section:
    """A heading-addressed region of one document.

    ``body`` excludes child-section bodies; ``char_span`` is the body's
    (start, end) offset range in the source content, with start == end for
    an empty body.
    """

    doc_id: str
    heading_path: tuple[str, ...]
    depth: int
    body: str
    char_span: tuple[int, int]
    section_seq: int

    def __post_init__(self):
        if self.depth != len(self.heading_path):
            raise ValueError("depth must equal heading_path length")
        start, end = self.char_span
        if self.body:
            if not start < end:
                raise ValueError("non-empty body requires char_span.start < end")
        elif start != end:
            raise ValueError("empty body requires char_span.start == end")


@dataclass(frozen=True)
class Chunk:
    """The smallest indexed unit of text.

    chunk_id is deterministic: ``<doc_id>#<section_seq>#<part_index>``.
    """

    chunk_id: str
    doc_id: str
    heading_path: tuple[str, ...]
    part_index: int
    text: str
    char_len: int

    def __post_init__(self):
        if self.char_len != len(self.text):
            raise ValueError("char_len must equal len(text)")
        if self.char_len <= 0:
            raise ValueError("chunk text must be non-empty")


def chunk_id_for(doc_id: str, section_seq: int, part_index: int) -> str:
    return f"{doc_id}#{section_seq}#{part_index}"


@dataclass
class CorpusManifest:
    documents: list[DocumentInfo] = field(default_factory=list)
    chunk_count: int = 0
    standard_names: list[str] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "documents": [
                {
                    "doc_id": d.doc_id,
                    "title": d.title,
                    "standard_name": d.standard_name,
                    "format": d.format,
                    "ingested_at": d.ingested_at.isoformat(),
                }
                for d in self.documents
            ],
            "chunk_count": self.chunk_count,
            "standard_names": list(self.standard_names),
        }


def _first_seen_standards(documents: list[DocumentInfo]) -> list[str]:
    seen: list[str] = []
    for d in documents:
        if d.standard_name not in seen:
            seen.append(d.standard_name)
    return seen


def _parse_manifest(data: dict) -> CorpusManifest:
    try:
        version = data["schema_version"]
        if not isinstance(version, int) or version < 1:
            raise CorruptManifest("schema_version must be a positive integer")
        documents = []
        for entry in data["documents"]:
            documents.append(
                DocumentInfo(
                    doc_id=entry["doc_id"],
                    title=entry["title"],
                    standard_name=entry["standard_name"],
                    format=entry["format"],
                    ingested_at=datetime.fromisoformat(entry["ingested_at"]),
                )
            )
        chunk_count = data["chunk_count"]
        standard_names = data["standard_names"]
    except CorruptManifest:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptManifest(f"manifest field invalid or missing: {exc}") from exc
    if not isinstance(chunk_count, int) or chunk_count < 0:
        raise CorruptManifest("chunk_count must be a non-negative integer")
    if standard_names != _first_seen_standards(documents):
        raise CorruptManifest(
            "standard_names does not match first-seen document standards"
        )
    ids = [d.doc_id for d in documents]
    if len(set(ids)) != len(ids):
        raise CorruptManifest("documents contain a duplicate doc_id")
    return CorpusManifest(
        documents=documents,
        chunk_count=chunk_count,
        standard_names=standard_names,
        schema_version=version,
    )


def _count_chunk_lines(data_dir: Path) -> int:
    path = data_dir / _CHUNKS_FILE
    if not path.exists():
        return 0
    with path.open("r", encoding="utf-8") as fh:
        return sum(1 for line in fh if line.strip())


def load_manifest(data_dir: str | Path) -> CorpusManifest:
    """Load and invariant-check the manifest of a corpus directory.

    An absent manifest yields an empty manifest.  Any parse failure or
    invariant violation raises CorruptManifest naming the failing field.
    """
    data_dir = Path(data_dir)
    path = data_dir / _MANIFEST_FILE
    if not path.exists():
        return CorpusManifest()
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CorruptManifest(f"manifest parse failure: {exc}") from exc
    manifest = _parse_manifest(data)
    actual = _count_chunk_lines(data_dir)
    if manifest.chunk_count != actual:
        raise CorruptManifest(
            f"chunk_count is {manifest.chunk_count} but chunk store has {actual} records"
        )
    return manifest


_WS_RUN = re.compile(r"\s+")


class CorpusStore:
    """Owns a corpus directory: documents, chunks, and the manifest."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        (self.data_dir / _DOCS_DIR).mkdir(exist_ok=True)
        self.manifest = load_manifest(self.data_dir)
        self._chunks_by_doc: dict[str, list[Chunk]] = {}
        self._chunk_index: dict[str, Chunk] = {}
        self._load_chunks()

    # -- documents -----------------------------------------------------

    def register_document(
        self,
        title: str,
        standard_name: str,
        format: str,
        content: str,
        now: datetime | None = None,
    ) -> SourceDocument:
        """Register a document, assigning a deterministic doc_id.

        Re-registering byte-identical content under the same title and
        standard is an idempotent no-op returning the existing document;
        differing content under the same computed id gets a "-<n>" suffix.
        """
        if not content.strip():
            raise EmptyContent("document content is empty after trimming")
        if not standard_name.strip():
            raise ValueError("standard_name must be non-empty")
        if format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")
        base = format_doc_id(title, standard_name)
        existing_ids = {d.doc_id for d in self.manifest.documents}
        n = 0
        while True:
            candidate = base if n == 0 else f"{base}-{n}"
            if candidate not in existing_ids:
                break
            prior = self._doc_info(candidate)
            if (
                prior is not None
                and prior.title == title
                and prior.standard_name == standard_name
                and self.document_content(candidate) == content
            ):
                return self.get_document(candidate)
            n += 1
        when = now if now is not None else datetime.now(timezone.utc)
        doc = SourceDocument(
            doc_id=candidate,
            title=title,
            standard_name=standard_name,
            format=format,
            content=content,
            ingested_at=when,
        )
        (self.data_dir / _DOCS_DIR / f"{candidate}.txt").write_text(
            content, encoding="utf-8"
        )
        self.manifest.documents.append(
            DocumentInfo(candidate, title, standard_name, format, when)
        )
        self.manifest.standard_names = _first_seen_standards(self.manifest.documents)
        self._save_manifest()
        return doc

    def _doc_info(self, doc_id: str) -> DocumentInfo | None:
        for d in self.manifest.documents:
            if d.doc_id == doc_id:
                return d
        return None

    def document_content(self, doc_id: str) -> str:
        return (self.data_dir / _DOCS_DIR / f"{doc_id}.txt").read_text(
            encoding="utf-8"
        )

    def get_document(self, doc_id: str) -> SourceDocument:
        info = self._doc_info(doc_id)
        if info is None:
            raise KeyError(f"unknown doc_id: {doc_id}")
        return SourceDocument(
            doc_id=info.doc_id,
            title=info.title,
            standard_name=info.standard_name,
            format=info.format,
            content=self.document_content(doc_id),
            ingested_at=info.ingested_at,
        )

    def title_of(self, doc_id: str) -> str:
        info = self._doc_info(doc_id)
        return info.title if info else doc_id

    def doc_titles(self) -> dict[str, str]:
        return {d.doc_id: d.title for d in self.manifest.documents}

    # -- chunks ----------------------------------------------------------

    def put_chunks(self, doc_id: str, chunks: list[Chunk]) -> None:
        """Replace a document's chunks and persist the chunk store."""
        if self._doc_info(doc_id) is None:
            raise KeyError(f"unknown doc_id: {doc_id}")
        for c in chunks:
            if c.doc_id != doc_id:
                raise ValueError("chunk doc_id does not match target document")
        self._chunks_by_doc[doc_id] = list(chunks)
        self._rebuild_chunk_index()
        self._save_chunks()
        self.manifest.chunk_count = len(self._chunk_index)
        self._save_manifest()

    def chunks_for(self, doc_id: str) -> list[Chunk]:
        return list(self._chunks_by_doc.get(doc_id, []))

    def all_chunks(self) -> list[Chunk]:
        out: list[Chunk] = []
        for d in self.manifest.documents:
            out.extend(self._chunks_by_doc.get(d.doc_id, []))
        return out

    def chunk_by_id(self, chunk_id: str) -> Chunk:
        try:
            return self._chunk_index[chunk_id]
        except KeyError:
            raise KeyError(f"unknown chunk_id: {chunk_id}") from None

    def has_chunk(self, chunk_id: str) -> bool:
        return chunk_id in self._chunk_index

    # -- persistence -----------------------------------------------------

    def _save_manifest(self) -> None:
        path = self.data_dir / _MANIFEST_FILE
        path.write_text(
            json.dumps(self.manifest.to_json(), indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )

    def _save_chunks(self) -> None:
        path = self.data_dir / _CHUNKS_FILE
        lines = []
        for d in self.manifest.documents:
            for c in self._chunks_by_doc.get(d.doc_id, []):
                lines.append(
                    json.dumps(
                        {
                            "chunk_id": c.chunk_id,
                            "doc_id": c.doc_id,
                            "heading_path": list(c.heading_path),
                            "part_index": c.part_index,
                            "text": c.text,
                        },
                        ensure_ascii=False,
                    )
                )
        path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")

    def _load_chunks(self) -> None:
        path = self.data_dir / _CHUNKS_FILE
        if not path.exists():
            return
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            chunk = Chunk(
                chunk_id=rec["chunk_id"],
                doc_id=rec["doc_id"],
                heading_path=tuple(rec["heading_path"]),
                part_index=rec["part_index"],
                text=rec["text"],
                char_len=len(rec["text"]),
            )
            self._chunks_by_doc.setdefault(chunk.doc_id, []).append(chunk)
        self._rebuild_chunk_index()

    def _rebuild_chunk_index(self) -> None:
        self._chunk_index = {}
        for chunks in self._chunks_by_doc.values():
            for c in chunks:
                if c.chunk_id in self._chunk_index:
                    raise ValueError(f"duplicate chunk_id in corpus: {c.chunk_id}")
                self._chunk_index[c.chunk_id] = c


def format_doc_id(title: str, standard_name: str) -> str:
    """Base doc_id: the FNV-1a 64-bit hash of title and standard as 16 lowercase hex digits."""
    h = fnv1a64((title + "\x1f" + standard_name).encode("utf-8"))
    return format(h, "016x")
