"""Exception hierarchy shared across the package.

Every error a caller is expected to handle has a named class here; modules
never raise bare ``Exception``.
"""

from __future__ import annotations


class AuditNetError(Exception):
    """Base class for all package errors."""


# corpus
class EmptyContent(AuditNetError):
    """Document content is empty after whitespace trimming."""


class CorruptManifest(AuditNetError):
    """Manifest failed to parse or violates an invariant; message names the field."""


# splitter
class EmptyCorpus(AuditNetError):
    """An operation that needs at least one section length got none."""


# embed
class EmptyText(AuditNetError):
    """A text submitted for embedding is empty after trimming."""

    def __init__(self, index: int):
        super().__init__(f"text at index {index} is empty after trimming")
        self.index = index


class ProviderError(AuditNetError):
    """Umbrella for any provider failure (unreachable remote or unmatched mock)."""


class ProviderUnreachable(ProviderError):
    """A remote provider failed after the retry policy was exhausted."""


class DimensionMismatch(AuditNetError):
    """Vector dimension differs from what the index or corpus expects."""


# vindex
class DuplicateChunkId(AuditNetError):
    """chunk_id already present in the index."""


class CorruptIndex(AuditNetError):
    """Index file failed a header or truncation check; message states the byte offset."""


# llm
class MockUnmatched(ProviderError):
    """Scripted mock had no matching rule and no default response."""


# interpreter
class AlreadyConfirmed(AuditNetError):
    """confirm() called on an interpretation that is not pending."""


class AllSlotsEmpty(AuditNetError):
    """Confirmation rejected: all three slots are null."""


# extractor
class EmptyIndex(AuditNetError):
    """Retrieval attempted against an index with no records."""


class DegenerateLabels(AuditNetError):
    """Calibration labels are all-relevant or all-irrelevant."""


# composer
class Misalignment(AuditNetError):
    """tag_results chunk_ids do not line up with findings chunk_ids."""


# evalkit
class UnboundPlaceholder(AuditNetError):
    """Template text references a placeholder with no declared domain."""


class DuplicateParaphrase(AuditNetError):
    """Paraphrase provider returned fewer distinct texts than requested."""


class UnknownChunkId(AuditNetError):
    """A gold chunk_id is absent from the indexed corpus."""


# server
class SessionNotFound(AuditNetError):
    """No session with the given id."""


class WrongState(AuditNetError):
    """Session is not in a state that permits the requested transition."""
