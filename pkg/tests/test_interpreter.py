import dataclasses

import pytest

from auditnet.errors import AllSlotsEmpty, AlreadyConfirmed
from auditnet.interpreter import (
    DEFAULT_PROMPTS,
    Interpretation,
    SlotPromptSet,
    confirm,
    gazetteer_extract,
    interpret,
    load_prompts,
    parse_slot_response,
    slot_values_match,
)
from auditnet.llm import CountingGateway, ScriptedMock


def pending(policy=None, standard=None, subject=None, source="llm"):
    return Interpretation(
        query_text="q?", policy=policy, standard=standard, subject=subject,
        source=source, status="pending",
    )


# -- response parsing ------------------------------------------------------

PARSE_CASES = [
    ('{"value": "Standard A"}', "Standard A"),
    ('{"value": "  padded  "}', "padded"),
    ('{"value": null}', None),
    ('{"value": ""}', None),
    ('{"value": "   "}', None),
    ('{"value": 7}', None),
    ('{"other": "x"}', None),
    ('```json\n{"value": "fenced"}\n```', "fenced"),
    ("[1, 2]", None),
    ('"just a json string"', None),
    ("42", None),
    ("Standard A", "Standard A"),
    ("  bare with spaces  ", "bare with spaces"),
    ("none", None),
    ("NULL", None),
    ("N/A", None),
    ("line one\nline two", None),
    ("x" * 81, None),
    ("x" * 80, "x" * 80),
    ("", None),
    (None, None),
]


@pytest.mark.parametrize("raw,expected", PARSE_CASES)
def test_parse_slot_response(raw, expected):
    assert parse_slot_response(raw) == expected


# -- prompt set ------------------------------------------------------------


def test_prompt_set_requires_query_placeholder():
    with pytest.raises(ValueError, match="policy_prompt"):
        SlotPromptSet(policy_prompt="no hole", standard_prompt="{query}", subject_prompt="{query}")


def test_default_prompts_have_placeholders():
    for slot in ("policy", "standard", "subject"):
        assert "{query}" in DEFAULT_PROMPTS.for_slot(slot)


def test_load_prompts(tmp_path):
    path = tmp_path / "prompts.json"
    path.write_text(
        '{"policy_prompt": "P {query}", "standard_prompt": "S {query}",'
        ' "subject_prompt": "J {query}"}'
    )
    prompts = load_prompts(path)
    assert prompts.for_slot("standard") == "S {query}"


# -- interpret -------------------------------------------------------------


def test_interpret_one_call_per_slot_in_order():
    gateway = CountingGateway(ScriptedMock(rules=[
        ("policy or security rule", '{"value": "password policy"}'),
        ("standard or regulation", '{"value": "Standard B"}'),
        ("subject of the question", '{"value": "device X"}'),
    ]))
    interp = interpret("Is device X ok?", DEFAULT_PROMPTS, gateway)
    assert gateway.call_count == 3
    assert interp.policy == "password policy"
    assert interp.standard == "Standard B"
    assert interp.subject == "device X"
    assert interp.source == "llm" and interp.status == "pending"
    # slot order fixed: policy, standard, subject
    markers = ["policy or security rule", "standard or regulation", "subject of the question"]
    for request, marker in zip(gateway.calls, markers):
        assert marker in request.user_prompt
        assert "Is device X ok?" in request.user_prompt
        assert request.temperature == 0.0


def test_interpret_garbled_responses_become_nulls():
    gateway = ScriptedMock(rules=[], default_response="not\nparseable\njunk")
    interp = interpret("Is device X ok?", DEFAULT_PROMPTS, gateway)
    assert (interp.policy, interp.standard, interp.subject) == (None, None, None)


def test_interpret_rejects_blank_query():
    gateway = ScriptedMock(rules=[], default_response="x")
    with pytest.raises(ValueError):
        interpret("   ", DEFAULT_PROMPTS, gateway)


# -- gazetteer fallback ----------------------------------------------------


def test_gazetteer_longest_match_wins():
    interp = gazetteer_extract(
        "Does PCI DSS v4 cover the core router?",
        standard_names=["PCI DSS", "PCI DSS v4", "SOC 2"],
        subject_terms=["router", "core router"],
    )
    assert interp.standard == "PCI DSS v4"
    assert interp.subject == "core router"
    assert interp.policy is None
    assert interp.source == "gazetteer" and interp.status == "pending"


def test_gazetteer_case_insensitive():
    interp = gazetteer_extract("is standard b relevant?", ["Standard B"], [])
    assert interp.standard == "Standard B"


def test_gazetteer_no_match_leaves_nulls():
    interp = gazetteer_extract("anything?", ["Standard B"], ["device"])
    assert (interp.policy, interp.standard, interp.subject) == (None, None, None)


# -- confirmation gate -----------------------------------------------------


def test_confirm_without_edits_keeps_source():
    out = confirm(pending(standard="Standard B"))
    assert out.status == "confirmed"
    assert out.source == "llm"
    assert out.standard == "Standard B"


def test_confirm_with_edits_marks_user_edited():
    out = confirm(pending(standard="Standard B"), {"subject": "device X"})
    assert out.source == "user_edited"
    assert out.subject == "device X"
    assert out.standard == "Standard B"


def test_confirm_edit_clears_slot():
    out = confirm(pending(policy="p", standard="s"), {"policy": None})
    assert out.policy is None and out.standard == "s"
    assert out.source == "user_edited"


def test_confirm_blank_edit_counts_as_clear():
    out = confirm(pending(policy="p", standard="s"), {"policy": "   "})
    assert out.policy is None


def test_confirm_all_slots_empty_rejected():
    with pytest.raises(AllSlotsEmpty):
        confirm(pending(policy="only"), {"policy": None})
    with pytest.raises(AllSlotsEmpty):
        confirm(pending())


def test_confirm_unknown_slot_rejected():
    with pytest.raises(ValueError, match="unknown slots"):
        confirm(pending(policy="p"), {"topic": "x"})


def test_confirm_twice_rejected():
    once = confirm(pending(policy="p"))
    with pytest.raises(AlreadyConfirmed):
        confirm(once)


def test_confirm_does_not_mutate_input():
    original = pending(policy="p")
    confirm(original, {"subject": "s"})
    assert original.status == "pending" and original.subject is None


def test_interpretation_validates_enums():
    with pytest.raises(ValueError):
        dataclasses.replace(pending(), source="oracle")
    with pytest.raises(ValueError):
        dataclasses.replace(pending(), status="done")
    with pytest.raises(ValueError):
        pending().slot("notaslot")


def test_interpretation_to_json_round_trip_fields():
    interp = pending(policy="p", standard="s", subject="j")
    data = interp.to_json()
    assert data == {
        "query_text": "q?",
        "policy": "p",
        "standard": "s",
        "subject": "j",
        "source": "llm",
        "status": "pending",
    }


# -- slot comparison -------------------------------------------------------

MATCH_CASES = [
    ("Standard B", "standard b", True),
    ("  Standard  B ", "standard B", True),
    (None, None, True),
    (None, "x", False),
    ("x", None, False),
    ("alpha", "beta", False),
]


@pytest.mark.parametrize("a,b,expected", MATCH_CASES)
def test_slot_values_match(a, b, expected):
    assert slot_values_match(a, b) is expected
