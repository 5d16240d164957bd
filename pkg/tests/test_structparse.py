import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from auditnet.structparse import (
    DEFAULT_PLAINTEXT_RULES,
    HeadingRule,
    MARKDOWN_RULES,
    PREAMBLE_HEADING,
    load_rules,
    match_heading,
    parse_structure,
    to_markdown,
    validate_rules,
)
from support import make_random_document


# -- heading matching ---------------------------------------------------------


def test_numbered_heading_depths():
    assert match_heading("5 Scope", DEFAULT_PLAINTEXT_RULES) == (1, "5 Scope")
    assert match_heading("5.1 Accounts", DEFAULT_PLAINTEXT_RULES) == (2, "5.1 Accounts")
    assert match_heading("5.1.2 Access Control Requirements", DEFAULT_PLAINTEXT_RULES) == (
        3,
        "5.1.2 Access Control Requirements",
    )


def test_numbered_depth_caps_at_six():
    line = "1.2.3.4.5.6.7.8 Deep"
    assert match_heading(line, DEFAULT_PLAINTEXT_RULES) == (6, line)


def test_long_numbered_line_is_body():
    line = "2024 was the year the team " + "audited the perimeter and " * 5 + "closed gaps."
    assert len(line) > 120
    assert match_heading(line, DEFAULT_PLAINTEXT_RULES) is None


def test_all_caps_heading():
    assert match_heading("INTRODUCTION", DEFAULT_PLAINTEXT_RULES) == (1, "INTRODUCTION")
    assert match_heading("SCOPE AND TERMS", DEFAULT_PLAINTEXT_RULES) == (1, "SCOPE AND TERMS")


def test_all_caps_rejections():
    for line in ["AB", "ENDS WITH PERIOD.", "Has Lowercase", "---", "X" * 81]:
        assert match_heading(line, DEFAULT_PLAINTEXT_RULES) is None


def test_numbered_beats_all_caps_by_priority():
    assert match_heading("5 ACCESS CONTROL", DEFAULT_PLAINTEXT_RULES) == (1, "5 ACCESS CONTROL")


def test_markdown_hashes():
    assert match_heading("# Top", MARKDOWN_RULES) == (1, "Top")
    assert match_heading("### Deep one", MARKDOWN_RULES) == (3, "Deep one")
    assert match_heading("####### seven", MARKDOWN_RULES) is None
    assert match_heading("5.1 Accounts", MARKDOWN_RULES) is None


def test_rule_validation():
    with pytest.raises(ValueError, match="anchored"):
        HeadingRule("r", r"\d+ .*$", "numbering", 1)
    with pytest.raises(ValueError, match="depth_source"):
        HeadingRule("r", r"^x$", "guesswork", 1)
    dup = [
        HeadingRule("a", r"^x$", "fixed", 5),
        HeadingRule("b", r"^y$", "fixed", 5),
    ]
    with pytest.raises(ValueError, match="unique"):
        validate_rules(dup)
    with pytest.raises(ValueError):
        validate_rules([])


def test_load_rules_from_json(tmp_path):
    path = tmp_path / "rules.json"
    path.write_text(
        '[{"rule_id": "num", "pattern": "^\\\\d+(\\\\.\\\\d+)*\\\\s+\\\\S.*$",'
        ' "depth_source": "numbering", "priority": 10}]'
    )
    rules = load_rules(path)
    assert match_heading("2.1 Something", rules) == (2, "2.1 Something")


# -- parsing ------------------------------------------------------------------

SAMPLE = """Some text before any heading.

1 Scope

Scope body line.

1.1 Terms

Term body.
More term body.

2 Duties

Duty body.
"""


def test_parse_basic_structure():
    sections = parse_structure(SAMPLE, "plaintext")
    paths = [s.heading_path for s in sections]
    assert paths == [
        (PREAMBLE_HEADING,),
        ("1 Scope",),
        ("1 Scope", "1.1 Terms"),
        ("2 Duties",),
    ]
    assert [s.depth for s in sections] == [1, 1, 2, 1]
    assert [s.section_seq for s in sections] == [0, 1, 2, 3]
    assert sections[2].body == "\nTerm body.\nMore term body.\n"


def test_parse_char_spans_map_to_source():
    for content in (SAMPLE, "no headings at all\njust text"):
        for s in parse_structure(content, "plaintext"):
            start, end = s.char_span
            assert content[start:end] == s.body


def test_parse_without_headings_is_all_preamble():
    sections = parse_structure("just text\nmore text", "plaintext")
    assert len(sections) == 1
    assert sections[0].heading_path == (PREAMBLE_HEADING,)
    assert sections[0].body == "just text\nmore text"
    assert sections[0].depth == 1


def test_parse_depth_jump_is_clamped():
    content = "1 A\n\n1.1.1 B\n\nbody\n"
    sections = parse_structure(content, "plaintext")
    b = sections[-1]
    assert b.heading_path == ("1 A", "1.1.1 B")
    assert b.depth == 2


def test_parse_sibling_and_pop_behavior():
    content = "1 A\n2 B\n2.1 C\n2.2 D\n3 E\n"
    paths = [s.heading_path for s in parse_structure(content, "plaintext")]
    assert paths == [
        ("1 A",),
        ("2 B",),
        ("2 B", "2.1 C"),
        ("2 B", "2.2 D"),
        ("3 E",),
    ]


def test_parse_line_conservation():
    """Sum of body lines plus heading lines equals total lines.

    In the generated documents every heading is followed by a blank line,
    so an empty body string always stands for exactly one blank line.
    """
    rng = random.Random(7)
    for _ in range(20):
        content = make_random_document(rng)
        lines = content.split("\n")
        if content.endswith("\n"):
            lines = lines[:-1]
        sections = parse_structure(content, "plaintext")
        heading_count = sum(
            1 for ln in lines if match_heading(ln, DEFAULT_PLAINTEXT_RULES) is not None
        )
        body_line_count = sum(
            s.body.count("\n") + 1 if s.body else 1 for s in sections
        )
        assert heading_count + body_line_count == len(lines)
        for s in sections:
            start, end = s.char_span
            assert content[start:end] == s.body


def test_parse_assigns_doc_id():
    sections = parse_structure("1 A\n\nbody\n", "plaintext", doc_id="d1")
    assert all(s.doc_id == "d1" for s in sections)


def test_parse_rejects_unknown_format():
    with pytest.raises(ValueError):
        parse_structure("x", "html")


# -- markdown rendering ----------------------------------------------------


def test_to_markdown_simple():
    # the blank line after the heading is body, so it survives as a
    # leading newline; trailing whitespace is dropped
    sections = parse_structure("1 Scope\n\nBody here.\n", "plaintext")
    assert to_markdown(sections) == "# 1 Scope\n\nBody here."


def test_to_markdown_round_trip_plaintext_to_markdown():
    sections = parse_structure(SAMPLE, "plaintext")
    md = to_markdown(sections)
    reparsed = parse_structure(md, "markdown")
    assert [s.heading_path for s in reparsed] == [s.heading_path for s in sections]
    assert [s.depth for s in reparsed] == [s.depth for s in sections]
    assert [s.body.rstrip() for s in reparsed] == [s.body.rstrip() for s in sections]


@given(st.integers(min_value=0, max_value=10_000))
def test_to_markdown_idempotent_on_random_docs(seed):
    rng = random.Random(seed)
    content = make_random_document(rng)
    sections = parse_structure(content, "plaintext")
    md = to_markdown(sections)
    again = to_markdown(parse_structure(md, "markdown"))
    assert again == md
