"""Evaluation toolkit: question templates, paraphrase augmentation, metrics.

A dataset starts from templates with placeholder domains and gold slot
values; Cartesian expansion yields base cases, a paraphrase provider
multiplies each into reworded variants sharing the same gold labels.
Slot accuracy and retrieval hit rate are computed against those labels.
The built-in paraphraser is rule-based and deterministic, so evaluation
runs offline and repeats exactly.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Protocol, Sequence

from .embed import EmbedProviderConfig, embed_texts
from .errors import DuplicateParaphrase, UnboundPlaceholder, UnknownChunkId
from .interpreter import SlotPromptSet, interpret, slot_values_match
from .llm import ChatGateway
from .vindex import VectorIndex

SLOTS = ("policy", "standard", "subject")
ORIGINS = ("base", "paraphrase")

_PLACEHOLDER = re.compile(r"\{(\w+)\}")


@dataclass(frozen=True)
class QuestionTemplate:
    template_id: str
    text: str
    placeholder_domains: dict[str, tuple[str, ...]]
    gold_slots: dict[str, str | None]

    def __post_init__(self):
        if not self.template_id or not self.text:
            raise ValueError("template_id and text must be non-empty")
        unknown = set(self.gold_slots) - set(SLOTS)
        if unknown:
            raise ValueError(f"unknown gold slots: {sorted(unknown)}")
        for name, domain in self.placeholder_domains.items():
            if not domain:
                raise ValueError(f"placeholder {name!r} has an empty domain")


@dataclass(frozen=True)
class EvalCase:
    case_id: str
    question: str
    gold: dict[str, str | None]
    origin: str
    parent_id: str | None = None

    def __post_init__(self):
        if self.origin not in ORIGINS:
            raise ValueError(f"origin must be one of {ORIGINS}")
        if (self.origin == "paraphrase") != (self.parent_id is not None):
            raise ValueError("parent_id is required exactly for paraphrase cases")


def load_templates(path: str | Path) -> list[QuestionTemplate]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return [_template_from_json(entry) for entry in data]


def _template_from_json(entry: dict) -> QuestionTemplate:
    return QuestionTemplate(
        template_id=entry["template_id"],
        text=entry["text"],
        placeholder_domains={
            k: tuple(v) for k, v in entry.get("placeholder_domains", {}).items()
        },
        gold_slots=dict(entry.get("gold_slots", {})),
    )


def fixture_templates() -> list[QuestionTemplate]:
    """The packaged 51-question compliance template set."""
    raw = resources.files("auditnet.fixtures").joinpath("templates.json").read_text("utf-8")
    return [_template_from_json(entry) for entry in json.loads(raw)]


def _substitute(text: str, bindings: dict[str, str], owner: str) -> str:
    def repl(m: re.Match) -> str:
        name = m.group(1)
        if name not in bindings:
            raise UnboundPlaceholder(
                f"template {owner}: placeholder {{{name}}} has no declared domain"
            )
        return bindings[name]

    return _PLACEHOLDER.sub(repl, text)


def expand_templates(templates: Sequence[QuestionTemplate]) -> list[EvalCase]:
    """Cartesian expansion over each template's placeholder domains.

    Case count is the sum over templates of the product of domain sizes.
    Placeholders may appear in the question text and in gold slot values;
    referencing an undeclared one raises UnboundPlaceholder.
    """
    cases: list[EvalCase] = []
    for template in templates:
        names = list(template.placeholder_domains)
        domains = [template.placeholder_domains[n] for n in names]
        for i, combo in enumerate(itertools.product(*domains)):
            bindings = dict(zip(names, combo))
            question = _substitute(template.text, bindings, template.template_id)
            gold: dict[str, str | None] = {}
            for slot in SLOTS:
                value = template.gold_slots.get(slot)
                gold[slot] = (
                    _substitute(value, bindings, template.template_id)
                    if value is not None
                    else None
                )
            cases.append(
                EvalCase(
                    case_id=f"{template.template_id}-{i:03d}",
                    question=question,
                    gold=gold,
                    origin="base",
                )
            )
    return cases


class ParaphraseProvider(Protocol):
    def paraphrase(self, question: str, n: int) -> list[str]: ...


class MockParaphraser:
    """Deterministic reworder built from five composable transforms.

    Transforms apply in a fixed cycle, each to the previous result; a
    transform that would not change the text is skipped.  Every applied
    transform strictly lengthens the text, so outputs are distinct from
    each other and from the original.
    """

    @staticmethod
    def _t_ask(text: str) -> str:
        return "Could you tell me: " + text[:1].lower() + text[1:]

    @staticmethod
    def _t_advise(text: str) -> str:
        return text + " Please advise."

    @staticmethod
    def _t_would(text: str) -> str:
        if text.startswith("Is "):
            return "Would you say " + text[3:]
        return text

    @staticmethod
    def _t_compliance(text: str) -> str:
        return text.replace("compliant with", "in compliance with")

    @staticmethod
    def _t_deployment(text: str) -> str:
        return "Regarding our deployment — " + text

    def paraphrase(self, question: str, n: int) -> list[str]:
        transforms = (
            self._t_ask,
            self._t_advise,
            self._t_would,
            self._t_compliance,
            self._t_deployment,
        )
        out: list[str] = []
        current = question
        step = 0
        while len(out) < n:
            candidate = transforms[step % len(transforms)](current)
            step += 1
            if candidate != current:
                out.append(candidate)
                current = candidate
        return out


def augment(
    case: EvalCase,
    n: int,
    provider: ParaphraseProvider,
) -> list[EvalCase]:
    """Derive n paraphrase cases from a base case, gold labels unchanged.

    The provider must return n texts distinct from each other and from the
    original question; duplicates raise DuplicateParaphrase listing them.
    """
    if case.origin != "base":
        raise ValueError("only base cases can be augmented")
    if n < 1:
        raise ValueError("n must be positive")
    texts = provider.paraphrase(case.question, n)
    if len(texts) != n:
        raise DuplicateParaphrase(
            f"provider returned {len(texts)} paraphrases, requested {n}"
        )
    seen: set[str] = {case.question}
    duplicates = []
    for t in texts:
        if t in seen:
            duplicates.append(t)
        seen.add(t)
    if duplicates:
        raise DuplicateParaphrase(f"duplicate paraphrases: {duplicates!r}")
    return [
        EvalCase(
            case_id=f"{case.case_id}-p{j:02d}",
            question=text,
            gold=dict(case.gold),
            origin="paraphrase",
            parent_id=case.case_id,
        )
        for j, text in enumerate(texts, start=1)
    ]


@dataclass(frozen=True)
class MetricsReport:
    n_cases: int
    slot_accuracy: dict[str, float] | None = None
    overall_accuracy: float | None = None
    retrieval_hit_rate: float | None = None
    k: int | None = None

    def to_json(self) -> dict:
        out: dict = {"n_cases": self.n_cases}
        if self.slot_accuracy is not None:
            out["slot_accuracy"] = dict(self.slot_accuracy)
            out["overall_accuracy"] = self.overall_accuracy
        if self.retrieval_hit_rate is not None:
            out["retrieval_hit_rate"] = self.retrieval_hit_rate
            out["k"] = self.k
        return out


def evaluate_slots(
    cases: Sequence[EvalCase],
    prompts: SlotPromptSet,
    gateway: ChatGateway,
) -> MetricsReport:
    """Interpret every case and score slot matches against gold.

    A slot matches when the values agree after trim, lowercase, and
    whitespace collapse; null matches only null.  Overall accuracy counts
    cases with all three slots correct.
    """
    if not cases:
        raise ValueError("evaluate_slots needs at least one case")
    per_slot = {slot: 0 for slot in SLOTS}
    all_correct = 0
    for case in cases:
        interpretation = interpret(case.question, prompts, gateway)
        hits = {
            slot: slot_values_match(interpretation.slot(slot), case.gold.get(slot))
            for slot in SLOTS
        }
        for slot, matched in hits.items():
            per_slot[slot] += matched
        all_correct += all(hits.values())
    n = len(cases)
    return MetricsReport(
        n_cases=n,
        slot_accuracy={slot: per_slot[slot] / n for slot in SLOTS},
        overall_accuracy=all_correct / n,
    )


def evaluate_retrieval(
    pairs: Sequence[tuple[EvalCase, str]],
    index: VectorIndex,
    embed_config: EmbedProviderConfig,
    k: int = 10,
) -> MetricsReport:
    """Hit@k over (case, gold chunk_id) pairs.

    The retrieval query is the case's gold slots joined (policy, subject,
    standard), or the question text when all are null.  Unknown gold
    chunk ids raise UnknownChunkId.
    """
    if not pairs:
        raise ValueError("evaluate_retrieval needs at least one pair")
    if k < 1:
        raise ValueError("k must be positive")
    for _, gold_chunk in pairs:
        if gold_chunk not in index:
            raise UnknownChunkId(f"gold chunk_id not indexed: {gold_chunk}")
    hits = 0
    for case, gold_chunk in pairs:
        parts = [
            case.gold.get(s)
            for s in ("policy", "subject", "standard")
            if case.gold.get(s)
        ]
        query = " ".join(parts) if parts else case.question
        [vec] = embed_texts([query], embed_config)
        top = index.search_topk(vec, k)
        if any(h.chunk_id == gold_chunk for h in top):
            hits += 1
    return MetricsReport(
        n_cases=len(pairs),
        retrieval_hit_rate=hits / len(pairs),
        k=k,
    )


def save_dataset(cases: Sequence[EvalCase], path: str | Path) -> None:
    lines = [
        json.dumps(
            {
                "case_id": c.case_id,
                "question": c.question,
                "gold": c.gold,
                "origin": c.origin,
                "parent_id": c.parent_id,
            },
            ensure_ascii=False,
        )
        for c in cases
    ]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_dataset(path: str | Path) -> list[EvalCase]:
    cases = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        cases.append(
            EvalCase(
                case_id=rec["case_id"],
                question=rec["question"],
                gold={slot: rec["gold"].get(slot) for slot in SLOTS},
                origin=rec.get("origin", "base"),
                parent_id=rec.get("parent_id"),
            )
        )
    return cases


def gold_slot_mock(cases: Sequence[EvalCase], prompts: SlotPromptSet):
    """Build a scripted gateway answering each case's slot prompts with its
    gold values; useful for pipeline-correctness tests and dry runs."""
    from .llm import ScriptedMock

    rules = []
    for case in cases:
        for slot in SLOTS:
            matcher = prompts.for_slot(slot).format(query=case.question)
            rules.append((matcher, json.dumps({"value": case.gold.get(slot)})))
    return ScriptedMock(rules=rules)
