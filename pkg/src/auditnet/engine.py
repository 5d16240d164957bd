"""Pipeline orchestration shared by the CLI and the HTTP server.

The engine owns a data directory (corpus, index snapshot, thresholds,
optional prompt and tag overrides) and wires the stages together: ingest
parses and chunks, rebuild embeds and indexes, interpret fills slots with
gazetteer fallback, answer retrieves, tags, and composes.  Provider
selection comes from AUDITNET_* environment variables; the default is the
offline mock pair, so a fresh checkout works with no network at all.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import composer, evalkit, extractor, interpreter, splitter, structparse, tagger
from .corpus import CorpusStore, SourceDocument
from .embed import EmbedProviderConfig, embed_texts
from .errors import EmptyCorpus, EmptyIndex, ProviderError, UnknownChunkId
from .llm import LlmProviderConfig, RemoteChatGateway, ScriptedMock
from .vindex import VectorIndex

INDEX_FILE = "index.bin"
THRESHOLDS_FILE = "thresholds.json"
PROMPTS_FILE = "prompts.json"
TAGS_FILE = "tags.json"
SUBJECTS_FILE = "subjects.json"

DEFAULT_DATA_DIR = "auditnet_data"

ENV_DATA_DIR = "AUDITNET_DATA_DIR"
ENV_PROVIDER = "AUDITNET_PROVIDER"
ENV_LLM_PROVIDER = "AUDITNET_LLM_PROVIDER"
ENV_EMBED_PROVIDER = "AUDITNET_EMBED_PROVIDER"
ENV_EMBED_URL = "AUDITNET_EMBED_URL"
ENV_LLM_URL = "AUDITNET_LLM_URL"
ENV_API_KEY = "AUDITNET_API_KEY"
ENV_LLM_RULES = "AUDITNET_LLM_RULES"
ENV_EMBED_DIM = "AUDITNET_EMBED_DIM"
ENV_TAG_MODE = "AUDITNET_TAG_MODE"

PERCENTILE_SCOPES = ("per_document", "corpus")


@dataclass
class EngineConfig:
    data_dir: Path
    embed: EmbedProviderConfig = field(default_factory=EmbedProviderConfig)
    llm_gateway: object = field(default_factory=ScriptedMock)
    splitter_config: splitter.SplitterConfig = field(
        default_factory=splitter.SplitterConfig
    )
    provider_mode: str = "mock"
    tag_mode: str = "paragraph"
    k: int = extractor.DEFAULT_K
    percentile_scope: str = "per_document"

    def __post_init__(self):
        self.data_dir = Path(self.data_dir)
        if self.tag_mode not in tagger.MODES:
            raise ValueError(f"tag_mode must be one of {tagger.MODES}")
        if self.percentile_scope not in PERCENTILE_SCOPES:
            raise ValueError(f"percentile_scope must be one of {PERCENTILE_SCOPES}")


def config_from_env(data_dir: str | Path | None = None) -> EngineConfig:
    """Build an EngineConfig from AUDITNET_* environment variables.

    AUDITNET_PROVIDER picks mock or remote for both services; the
    per-service variables override it.  Remote services need their URL
    variables set.  AUDITNET_LLM_RULES points the mock gateway at a
    scripted-rules JSON file.
    """
    env = os.environ
    resolved_dir = Path(data_dir or env.get(ENV_DATA_DIR) or DEFAULT_DATA_DIR)
    base = env.get(ENV_PROVIDER, "mock").strip().lower() or "mock"
    if base not in ("mock", "remote"):
        raise ValueError(f"{ENV_PROVIDER} must be 'mock' or 'remote', got {base!r}")
    llm_kind = env.get(ENV_LLM_PROVIDER, base).strip().lower()
    embed_kind = env.get(ENV_EMBED_PROVIDER, base).strip().lower()
    api_key = env.get(ENV_API_KEY, "")

    dim = int(env.get(ENV_EMBED_DIM, "64"))
    if embed_kind == "remote":
        url = env.get(ENV_EMBED_URL, "")
        if not url:
            raise ValueError(f"{ENV_EMBED_URL} is required for a remote embed provider")
        embed = EmbedProviderConfig(kind="remote", endpoint_url=url, api_key=api_key)
    else:
        embed = EmbedProviderConfig(kind="mock", dim=dim)

    if llm_kind == "remote":
        url = env.get(ENV_LLM_URL, "")
        if not url:
            raise ValueError(f"{ENV_LLM_URL} is required for a remote chat provider")
        gateway: object = RemoteChatGateway(
            LlmProviderConfig(endpoint_url=url, api_key=api_key)
        )
    elif env.get(ENV_LLM_RULES):
        gateway = ScriptedMock.from_json_file(env[ENV_LLM_RULES])
    else:
        # no rules configured: every call misses, which routes
        # interpretation to the gazetteer fallback
        gateway = ScriptedMock()

    mode = llm_kind if llm_kind == embed_kind else "mixed"
    tag_mode = env.get(ENV_TAG_MODE, "paragraph").strip().lower() or "paragraph"
    return EngineConfig(
        data_dir=resolved_dir,
        embed=embed,
        llm_gateway=gateway,
        provider_mode=mode,
        tag_mode=tag_mode,
    )


class Engine:
    def __init__(self, config: EngineConfig):
        self.config = config
        self.store = CorpusStore(config.data_dir)
        self._index: VectorIndex | None = None
        tags_path = config.data_dir / TAGS_FILE
        self.tag_schema = (
            tagger.load_tag_schema(tags_path)
            if tags_path.exists()
            else tagger.default_tag_schema()
        )
        prompts_path = config.data_dir / PROMPTS_FILE
        self.prompts = (
            interpreter.load_prompts(prompts_path)
            if prompts_path.exists()
            else interpreter.DEFAULT_PROMPTS
        )
        thresholds_path = config.data_dir / THRESHOLDS_FILE
        self.thresholds = (
            extractor.load_thresholds(thresholds_path)
            if thresholds_path.exists()
            else extractor.ThresholdTable()
        )
        subjects_path = config.data_dir / SUBJECTS_FILE
        if subjects_path.exists():
            self.subject_terms = list(json.loads(subjects_path.read_text("utf-8")))
        else:
            self.subject_terms = []

    @classmethod
    def from_env(cls, data_dir: str | Path | None = None) -> "Engine":
        return cls(config_from_env(data_dir))

    # -- corpus ----------------------------------------------------------

    def _sections_for(self, doc: SourceDocument):
        return structparse.parse_structure(
            doc.content, format=doc.format, doc_id=doc.doc_id
        )

    def ingest(
        self, title: str, standard_name: str, format: str, content: str
    ) -> dict:
        """Register a document and chunk it under its own percentile limit."""
        doc = self.store.register_document(title, standard_name, format, content)
        sections = self._sections_for(doc)
        lengths = splitter.section_lengths(sections, self.config.splitter_config)
        limit = splitter.chunk_limit(lengths, self.config.splitter_config)
        chunks = splitter.split_document(sections, limit, self.config.splitter_config)
        self.store.put_chunks(doc.doc_id, chunks)
        return {
            "doc_id": doc.doc_id,
            "title": doc.title,
            "standard_name": doc.standard_name,
            "n_sections": len(sections),
            "n_chunks": len(chunks),
            "chunk_limit": limit,
        }

    def _corpus_limit(self) -> int:
        lengths: list[int] = []
        for info in self.store.manifest.documents:
            doc = self.store.get_document(info.doc_id)
            lengths.extend(
                splitter.section_lengths(
                    self._sections_for(doc), self.config.splitter_config
                )
            )
        return splitter.chunk_limit(lengths, self.config.splitter_config)

    def rebuild_index(self) -> dict:
        """Re-chunk every document, embed all chunks, write the snapshot."""
        documents = self.store.manifest.documents
        if not documents:
            raise EmptyCorpus("cannot build an index over an empty corpus")
        corpus_limit = (
            self._corpus_limit() if self.config.percentile_scope == "corpus" else None
        )
        per_doc_limit: dict[str, int] = {}
        all_chunks = []
        for info in documents:
            doc = self.store.get_document(info.doc_id)
            sections = self._sections_for(doc)
            if corpus_limit is not None:
                limit = corpus_limit
            else:
                lengths = splitter.section_lengths(
                    sections, self.config.splitter_config
                )
                limit = splitter.chunk_limit(lengths, self.config.splitter_config)
            chunks = splitter.split_document(
                sections, limit, self.config.splitter_config
            )
            self.store.put_chunks(doc.doc_id, chunks)
            per_doc_limit[doc.doc_id] = limit
            all_chunks.extend(chunks)
        if not all_chunks:
            raise EmptyCorpus("corpus produced no chunks")
        vectors = embed_texts([c.text for c in all_chunks], self.config.embed)
        index = VectorIndex(vectors[0].dim)
        for chunk, vec in zip(all_chunks, vectors):
            index.add(chunk.chunk_id, chunk.doc_id, vec)
        index.save(self.config.data_dir / INDEX_FILE)
        self._index = index
        return {"chunks_indexed": len(index), "chunk_limit_per_doc": per_doc_limit}

    @property
    def index(self) -> VectorIndex:
        if self._index is None:
            path = self.config.data_dir / INDEX_FILE
            if not path.exists():
                raise EmptyIndex(
                    "no index snapshot found; run the index command first"
                )
            self._index = VectorIndex.load(path)
        return self._index

    # -- stats -------------------------------------------------------------

    def stats(self, n_buckets: int = 20) -> dict:
        documents = self.store.manifest.documents
        if not documents:
            raise EmptyCorpus("stats need at least one ingested document")
        per_document = []
        corpus_lengths: list[int] = []
        for info in documents:
            doc = self.store.get_document(info.doc_id)
            sections = self._sections_for(doc)
            lengths = splitter.section_lengths(sections, self.config.splitter_config)
            corpus_lengths.extend(lengths)
            per_document.append(
                {
                    "doc_id": info.doc_id,
                    "title": info.title,
                    "standard_name": info.standard_name,
                    "n_sections": len(sections),
                    "n_chunks": len(self.store.chunks_for(info.doc_id)),
                    "chunk_limit": splitter.chunk_limit(
                        lengths, self.config.splitter_config
                    ),
                    "histogram": splitter.length_histogram(
                        lengths, n_buckets
                    ).to_json(),
                }
            )
        return {
            "per_document": per_document,
            "corpus": {
                "n_documents": len(documents),
                "n_sections": len(corpus_lengths),
                "n_chunks": self.store.manifest.chunk_count,
                "chunk_limit": splitter.chunk_limit(
                    corpus_lengths, self.config.splitter_config
                ),
                "histogram": splitter.length_histogram(
                    corpus_lengths, n_buckets
                ).to_json(),
            },
        }

    # -- query pipeline ----------------------------------------------------

    def interpret(self, query: str) -> interpreter.Interpretation:
        """Slot extraction with gazetteer fallback on provider failure."""
        try:
            return interpreter.interpret(query, self.prompts, self.config.llm_gateway)
        except ProviderError:
            return interpreter.gazetteer_extract(
                query,
                standard_names=self.store.manifest.standard_names,
                subject_terms=self.subject_terms,
            )

    def answer(
        self, confirmed: interpreter.Interpretation, k: int | None = None
    ) -> composer.AnswerBundle:
        """Retrieve, tag, and compose for a confirmed interpretation.

        Tagging degrades to empty tags when the chat provider fails;
        retrieval and composition still complete.
        """
        findings = extractor.retrieve(
            confirmed,
            self.index,
            self.store,
            self.config.embed,
            self.thresholds,
            k=k or self.config.k,
        )
        tag_results = []
        for finding in findings:
            chunk = self.store.chunk_by_id(finding.chunk_id)
            try:
                result = tagger.tag_chunk(
                    chunk, self.tag_schema, self.config.tag_mode, self.config.llm_gateway
                )
            except ProviderError:
                result = tagger.TagResult(
                    chunk_id=chunk.chunk_id,
                    mode=self.config.tag_mode,
                    tags=(),
                    raw_responses=(),
                )
            tag_results.append(result)
        return composer.compose(
            confirmed,
            findings,
            tag_results,
            self.store.doc_titles(),
            created_at=datetime.now(timezone.utc),
        )

    # -- calibration ---------------------------------------------------------

    def calibrate(self, labels: list[dict]) -> dict:
        """Fit per-document thresholds from labeled examples and persist them.

        Each label is {"query", "chunk_id", "relevant"}.  Documents whose
        labels are all one class keep their previous threshold; the default
        threshold refits over the pooled labels when possible.
        """
        if not labels:
            raise ValueError("calibration needs at least one label")
        index = self.index
        queries = sorted({lb["query"] for lb in labels})
        vectors = dict(zip(queries, embed_texts(queries, self.config.embed)))
        scored: list[tuple[str, float, bool]] = []
        for lb in labels:
            chunk_id = lb["chunk_id"]
            if chunk_id not in index:
                raise UnknownChunkId(f"labeled chunk_id not indexed: {chunk_id}")
            qv = vectors[lb["query"]].values.astype("float64")
            cv = index.vector_of(chunk_id).values.astype("float64")
            scored.append((index.doc_of(chunk_id), float(qv @ cv), bool(lb["relevant"])))

        by_doc: dict[str, list[tuple[float, bool]]] = {}
        for doc_id, score, relevant in scored:
            by_doc.setdefault(doc_id, []).append((score, relevant))

        summary: dict[str, dict] = {}
        for doc_id, pairs in sorted(by_doc.items()):
            classes = {r for _, r in pairs}
            if len(classes) < 2:
                summary[doc_id] = {"threshold": None, "f1": None, "skipped": True}
                continue
            t = extractor.calibrate_threshold(pairs)
            self.thresholds.per_doc[doc_id] = t
            summary[doc_id] = {
                "threshold": t,
                "f1": extractor.f1_at_threshold(pairs, t),
                "skipped": False,
            }
        pooled = [(s, r) for _, s, r in scored]
        if len({r for _, r in pooled}) == 2:
            self.thresholds.default_threshold = extractor.calibrate_threshold(pooled)
        extractor.save_thresholds(
            self.thresholds, self.config.data_dir / THRESHOLDS_FILE
        )
        return {
            "default_threshold": self.thresholds.default_threshold,
            "per_doc": summary,
        }

    # -- evaluation -----------------------------------------------------------

    def evaluate_slots(self, cases) -> evalkit.MetricsReport:
        return evalkit.evaluate_slots(cases, self.prompts, self.config.llm_gateway)
