"""Structural parsing: turn flat document text into heading-addressed sections.

Headings are recognized line-by-line against an ordered rule set (lowest
priority number wins).  Plaintext defaults recognize numbered headings
("5.1.2 Access Control Requirements") and short ALL-CAPS lines; markdown
uses hash prefixes only.  Everything between two headings is the body of
the first; text before any heading lands in a synthetic "(preamble)"
section so no line is ever dropped.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .corpus import FORMATS, Section

PREAMBLE_HEADING = "(preamble)"
MAX_DEPTH = 6

# Numbered headings longer than this are treated as body text; real section
# titles are short, sentences that merely start with a number are not.
NUMBERING_MAX_CHARS = 120

DEPTH_SOURCES = ("numbering", "markdown_hashes", "fixed")


@dataclass(frozen=True)
class HeadingRule:
    """One line-level heading matcher.

    ``depth_source`` picks how the heading's depth is derived: "numbering"
    counts dotted number components, "markdown_hashes" counts leading
    hashes, "fixed" uses ``fixed_depth``.
    """

    rule_id: str
    pattern: str
    depth_source: str
    priority: int
    fixed_depth: int = 1

    def __post_init__(self):
        if not self.rule_id:
            raise ValueError("rule_id must be non-empty")
        if not (self.pattern.startswith("^") and self.pattern.endswith("$")):
            raise ValueError(f"rule {self.rule_id}: pattern must be anchored with ^ and $")
        re.compile(self.pattern)
        if self.depth_source not in DEPTH_SOURCES:
            raise ValueError(f"rule {self.rule_id}: unknown depth_source {self.depth_source!r}")
        if not 1 <= self.fixed_depth <= MAX_DEPTH:
            raise ValueError(f"rule {self.rule_id}: fixed_depth out of range")


DEFAULT_PLAINTEXT_RULES = (
    HeadingRule(
        rule_id="numbered",
        pattern=r"^\d+(\.\d+)*\s+\S.*$",
        depth_source="numbering",
        priority=10,
    ),
    HeadingRule(
        rule_id="all-caps",
        pattern=r"^(?!.*[a-z])(?=.*[A-Z])(?!.*\.$).{3,80}$",
        depth_source="fixed",
        priority=20,
        fixed_depth=1,
    ),
)

MARKDOWN_RULES = (
    HeadingRule(
        rule_id="hashes",
        pattern=r"^#{1,6}\s+\S.*$",
        depth_source="markdown_hashes",
        priority=10,
    ),
)

_LEADING_NUMBER = re.compile(r"^(\d+(?:\.\d+)*)")
_LEADING_HASHES = re.compile(r"^(#{1,6})")


def validate_rules(rules) -> tuple[HeadingRule, ...]:
    rules = tuple(rules)
    if not rules:
        raise ValueError("rule set must contain at least one rule")
    priorities = [r.priority for r in rules]
    if len(set(priorities)) != len(priorities):
        raise ValueError("rule priorities must be unique within a rule set")
    return tuple(sorted(rules, key=lambda r: r.priority))


def load_rules(path: str | Path) -> tuple[HeadingRule, ...]:
    """Load a heading rule set from a JSON list of rule objects."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise ValueError("rule file must contain a JSON list")
    rules = []
    for entry in data:
        rules.append(
            HeadingRule(
                rule_id=entry["rule_id"],
                pattern=entry["pattern"],
                depth_source=entry["depth_source"],
                priority=entry["priority"],
                fixed_depth=entry.get("fixed_depth", 1),
            )
        )
    return validate_rules(rules)


def match_heading(line: str, rules) -> tuple[int, str] | None:
    """Return (depth, heading_text) for the first matching rule, else None.

    Rules are tried in priority order.  A line matching no rule is body
    text.  Depth is capped at MAX_DEPTH.
    """
    for rule in validate_rules(rules):
        if not re.fullmatch(rule.pattern, line):
            continue
        if rule.depth_source == "numbering":
            if len(line) > NUMBERING_MAX_CHARS:
                continue
            number = _LEADING_NUMBER.match(line).group(1)
            depth = min(number.count(".") + 1, MAX_DEPTH)
            return depth, line.strip()
        if rule.depth_source == "markdown_hashes":
            hashes = _LEADING_HASHES.match(line).group(1)
            text = line[len(hashes):].strip()
            return len(hashes), text
        return rule.fixed_depth, line.strip()
    return None


def parse_structure(
    content: str,
    format: str = "plaintext",
    rules=None,
    doc_id: str = "",
) -> list[Section]:
    """Split document content into sections at recognized heading lines.

    Every line of the input is either a heading line or belongs to exactly
    one section body, blank lines included.  A heading nested more than one
    level below its parent is clamped to parent depth + 1.  char_span covers
    the body region in the original content.
    """
    if format not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    if rules is None:
        rules = MARKDOWN_RULES if format == "markdown" else DEFAULT_PLAINTEXT_RULES
    rules = validate_rules(rules)

    lines = content.split("\n")
    if content.endswith("\n"):
        lines = lines[:-1]
    starts = []
    pos = 0
    for ln in lines:
        starts.append(pos)
        pos += len(ln) + 1

    sections: list[Section] = []
    # (depth, heading_text) entries of currently open ancestors
    stack: list[tuple[int, str]] = []
    body_lines: list[str] = []
    body_start = 0

    def emit(body_end_line: int) -> None:
        """Close the current section over buffered body lines."""
        if stack:
            path = tuple(text for _, text in stack)
            depth = stack[-1][0]
        else:
            if not body_lines:
                return
            path = (PREAMBLE_HEADING,)
            depth = 1
        body = "\n".join(body_lines)
        if body:
            span = (body_start, starts[body_end_line - 1] + len(lines[body_end_line - 1]))
        else:
            anchor = min(body_start, len(content))
            span = (anchor, anchor)
        sections.append(
            Section(
                doc_id=doc_id,
                heading_path=path,
                depth=depth,
                body=body,
                char_span=span,
                section_seq=len(sections),
            )
        )

    for i, line in enumerate(lines):
        matched = match_heading(line, rules)
        if matched is None:
            body_lines.append(line)
            continue
        emit(i)
        depth, text = matched
        while stack and stack[-1][0] >= depth:
            stack.pop()
        parent_depth = stack[-1][0] if stack else 0
        depth = min(depth, parent_depth + 1)
        stack.append((depth, text))
        body_lines = []
        body_start = starts[i] + len(line) + 1
    emit(len(lines))
    return sections


def to_markdown(sections) -> str:
    """Render sections back to markdown: hash heading lines above bodies.

    Trailing whitespace-only lines of each body are dropped; that aside,
    parsing the result as markdown reproduces the sections, and rendering
    is idempotent.
    """
    blocks = []
    for s in sections:
        if not s.heading_path:
            raise ValueError("section has an empty heading_path")
        lines = ["#" * min(s.depth, MAX_DEPTH) + " " + s.heading_path[-1]]
        body = s.body.rstrip()
        if body:
            lines.append(body)
        blocks.append("\n".join(lines))
    return "\n".join(blocks)
