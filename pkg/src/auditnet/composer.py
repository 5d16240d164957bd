"""Mechanical answer assembly.

No model writes the final answer.  The response is a deterministic
markdown rendering of the confirmed interpretation and the retrieved,
tagged findings: one bullet per finding with a [n] marker, then a
references list resolving each marker to document, heading path, and
control id.  What was retrieved is exactly what is shown.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import Mapping, Sequence

from .errors import Misalignment
from .extractor import PolicyFinding
from .interpreter import Interpretation
from .tagger import TagResult

NO_FINDINGS_SENTENCE = (
    "No relevant policy controls were found above the similarity threshold."
)
HEADING_JOINER = " › "  # single right angle quote between path elements


@dataclass(frozen=True)
class AnswerBundle:
    query_text: str
    interpretation: Interpretation
    findings: tuple[PolicyFinding, ...]
    tag_results: tuple[TagResult, ...]
    rendered_markdown: str
    created_at: datetime

    def to_json(self) -> dict:
        return {
            "query_text": self.query_text,
            "interpretation": self.interpretation.to_json(),
            "findings": [f.to_json() for f in self.findings],
            "tags": {t.chunk_id: list(t.tags) for t in self.tag_results},
            "markdown": self.rendered_markdown,
            "created_at": self.created_at.isoformat(),
        }


def _slot_line(interpretation: Interpretation) -> str:
    def show(v: str | None) -> str:
        return v if v else "(none)"

    return (
        f"**Interpreted query:** policy: {show(interpretation.policy)}; "
        f"standard: {show(interpretation.standard)}; "
        f"subject: {show(interpretation.subject)}"
    )


def render_markdown(
    interpretation: Interpretation,
    findings: Sequence[PolicyFinding],
    tag_results: Sequence[TagResult],
    doc_titles: Mapping[str, str],
) -> str:
    lines = [_slot_line(interpretation), ""]
    if not findings:
        lines.append(NO_FINDINGS_SENTENCE)
        return "\n".join(lines)
    tags_by_chunk = {t.chunk_id: t.tags for t in tag_results}
    lines.append("**Relevant policy controls:**")
    lines.append("")
    for i, finding in enumerate(findings, start=1):
        bullet = f"- [{i}] {finding.excerpt}"
        tags = tags_by_chunk.get(finding.chunk_id, ())
        if tags:
            bullet += f" (tags: {', '.join(tags)})"
        lines.append(bullet)
    lines.append("")
    lines.append("## References")
    for i, finding in enumerate(findings, start=1):
        title = doc_titles.get(finding.doc_id, finding.doc_id)
        entry = f"[{i}] {title}{HEADING_JOINER}{HEADING_JOINER.join(finding.heading_path)}"
        if finding.control_id:
            entry += f" (control {finding.control_id})"
        lines.append(entry)
    return "\n".join(lines)


def compose(
    interpretation: Interpretation,
    findings: Sequence[PolicyFinding],
    tag_results: Sequence[TagResult],
    doc_titles: Mapping[str, str],
    created_at: datetime,
) -> AnswerBundle:
    """Assemble the final answer.

    tag_results must align one-to-one, in order, with findings; the
    rendering carries one [n] marker per finding plus its references
    entry, so citations are a bijection by construction.
    """
    if interpretation.status != "confirmed":
        raise ValueError("compose requires a confirmed interpretation")
    if [t.chunk_id for t in tag_results] != [f.chunk_id for f in findings]:
        raise Misalignment("tag_results do not align with findings")
    rendered = render_markdown(interpretation, findings, tag_results, doc_titles)
    return AnswerBundle(
        query_text=interpretation.query_text,
        interpretation=interpretation,
        findings=tuple(findings),
        tag_results=tuple(tag_results),
        rendered_markdown=rendered,
        created_at=created_at,
    )
