"""Query interpretation: three slots, three prompts, one human gate.

A compliance question is reduced to policy, standard, and subject slots
via one chat call per slot.  Nothing downstream runs until a person (or
an explicit auto-confirm) has confirmed the interpretation, editing slots
if needed.  When the chat provider is down, a gazetteer scan over known
standard names and subject terms produces a degraded interpretation so
the pipeline stays usable.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping

from .errors import AllSlotsEmpty, AlreadyConfirmed
from .llm import ChatGateway, CompletionRequest, strip_code_fences

SLOTS = ("policy", "standard", "subject")
SOURCES = ("llm", "gazetteer", "user_edited")
STATUSES = ("pending", "confirmed")

# Lenient parse: a bare one-line reply is taken verbatim unless it is a
# spelled-out null or too long to be a slot value.
MAX_BARE_VALUE_CHARS = 80
_NULL_WORDS = frozenset({"none", "null", "n/a"})

DEFAULT_SYSTEM_PROMPT = (
    "You extract one field from a user's network-security compliance question. "
    'Reply with a JSON object {"value": <string or null>} and nothing else.'
)


@dataclass(frozen=True)
class SlotPromptSet:
    policy_prompt: str
    standard_prompt: str
    subject_prompt: str

    def __post_init__(self):
        for name in ("policy_prompt", "standard_prompt", "subject_prompt"):
            template = getattr(self, name)
            if "{query}" not in template:
                raise ValueError(f"{name} must contain a {{query}} placeholder")

    def for_slot(self, slot: str) -> str:
        return getattr(self, f"{slot}_prompt")


DEFAULT_PROMPTS = SlotPromptSet(
    policy_prompt=(
        "Question: {query}\n"
        "What is the name of the policy or security rule the question refers to? "
        "If none is mentioned, use null."
    ),
    standard_prompt=(
        "Question: {query}\n"
        "What is the name of the standard or regulation the question refers to? "
        "If none is mentioned, use null."
    ),
    subject_prompt=(
        "Question: {query}\n"
        "What is the subject of the question, that is the network deployment, "
        "service, or device it asks about? If none is mentioned, use null."
    ),
)


def load_prompts(path: str | Path) -> SlotPromptSet:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return SlotPromptSet(
        policy_prompt=data["policy_prompt"],
        standard_prompt=data["standard_prompt"],
        subject_prompt=data["subject_prompt"],
    )


@dataclass(frozen=True)
class Interpretation:
    query_text: str
    policy: str | None
    standard: str | None
    subject: str | None
    source: str
    status: str

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"source must be one of {SOURCES}")
        if self.status not in STATUSES:
            raise ValueError(f"status must be one of {STATUSES}")

    def slot(self, name: str) -> str | None:
        if name not in SLOTS:
            raise ValueError(f"unknown slot: {name}")
        return getattr(self, name)

    def to_json(self) -> dict:
        return {
            "query_text": self.query_text,
            "policy": self.policy,
            "standard": self.standard,
            "subject": self.subject,
            "source": self.source,
            "status": self.status,
        }


def parse_slot_response(raw: str | None) -> str | None:
    """Extract a slot value from a model reply.

    Accepts {"value": ...} JSON (fenced or bare).  Valid JSON that is not
    an object yields null.  Non-JSON replies are taken verbatim when they
    look like a plausible value: single line, short, not a spelled-out null.
    """
    if raw is None:
        return None
    s = strip_code_fences(raw)
    if not s:
        return None
    try:
        data = json.loads(s)
    except ValueError:
        if "\n" in s or len(s) > MAX_BARE_VALUE_CHARS:
            return None
        if s.lower() in _NULL_WORDS:
            return None
        return s
    if isinstance(data, dict):
        value = data.get("value")
        if isinstance(value, str) and value.strip():
            return value.strip()
        return None
    return None


def interpret(
    query: str,
    prompts: SlotPromptSet,
    gateway: ChatGateway,
) -> Interpretation:
    """Fill the three slots with one gateway call each, in slot order."""
    if not query or not query.strip():
        raise ValueError("query must be non-empty")
    values: dict[str, str | None] = {}
    for slot in SLOTS:
        raw = gateway.complete(
            CompletionRequest(
                system_prompt=DEFAULT_SYSTEM_PROMPT,
                user_prompt=prompts.for_slot(slot).format(query=query),
                temperature=0.0,
            )
        )
        values[slot] = parse_slot_response(raw)
    return Interpretation(
        query_text=query,
        policy=values["policy"],
        standard=values["standard"],
        subject=values["subject"],
        source="llm",
        status="pending",
    )


def _longest_match(query_lower: str, terms) -> str | None:
    best: str | None = None
    for term in terms:
        if term and term.lower() in query_lower and (
            best is None or len(term) > len(best)
        ):
            best = term
    return best


def gazetteer_extract(query: str, standard_names, subject_terms=()) -> Interpretation:
    """Degraded slot filling by substring scan, no model involved.

    The longest known standard name and subject term found in the query
    (case-insensitive) fill those slots; policy stays null.
    """
    if not query or not query.strip():
        raise ValueError("query must be non-empty")
    q = query.lower()
    return Interpretation(
        query_text=query,
        policy=None,
        standard=_longest_match(q, standard_names),
        subject=_longest_match(q, subject_terms),
        source="gazetteer",
        status="pending",
    )


def confirm(
    interpretation: Interpretation,
    edits: Mapping[str, str | None] | None = None,
) -> Interpretation:
    """Apply slot edits and mark the interpretation confirmed.

    Only pending interpretations may be confirmed.  Edits override the
    listed slots (None clears a slot); at least one slot must be non-null
    after edits.  Any edit marks the result user_edited.
    """
    if interpretation.status != "pending":
        raise AlreadyConfirmed("interpretation was already confirmed")
    edits = dict(edits or {})
    unknown = set(edits) - set(SLOTS)
    if unknown:
        raise ValueError(f"unknown slots in edits: {sorted(unknown)}")
    new_values = {slot: interpretation.slot(slot) for slot in SLOTS}
    for slot, value in edits.items():
        if value is not None:
            value = value.strip() or None
        new_values[slot] = value
    if all(v is None for v in new_values.values()):
        raise AllSlotsEmpty("confirmation requires at least one non-null slot")
    return replace(
        interpretation,
        policy=new_values["policy"],
        standard=new_values["standard"],
        subject=new_values["subject"],
        source="user_edited" if edits else interpretation.source,
        status="confirmed",
    )


_COLLAPSE = re.compile(r"\s+")


def slot_values_match(a: str | None, b: str | None) -> bool:
    """Slot equality for evaluation: trim, lowercase, collapse whitespace;
    two nulls match."""
    if a is None or b is None:
        return a is None and b is None
    return _COLLAPSE.sub(" ", a.strip().lower()) == _COLLAPSE.sub(" ", b.strip().lower())
