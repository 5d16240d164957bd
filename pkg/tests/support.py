"""Shared test helpers: independent reference oracles and corpus fixtures.

The reference implementations here are deliberately written with different
code (hex constants, plain-int modular arithmetic, sequential float math)
than the package so that agreement is evidence, not tautology.
"""

from __future__ import annotations

import math
import random
import struct

# -- reference hashing oracles ------------------------------------------------

_M64 = 1 << 64


def ref_fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h = ((h ^ byte) * 0x100000001B3) % _M64
    return h


def ref_splitmix_sequence(seed: int, count: int) -> list[int]:
    out = []
    state = seed % _M64
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) % _M64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) % _M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) % _M64
        out.append(z ^ (z >> 31))
    return out


def ref_unit_interval(u: int) -> float:
    return (u >> 11) / 2**53 * 2 - 1


def ref_mock_embedding_bytes(text: str, dim: int) -> bytes:
    """Pure-Python reimplementation of the mock embedding, to the bit."""
    acc = [0.0] * dim
    for token in text.lower().split():
        seed = ref_fnv1a64(token.encode("utf-8"))
        for i, u in enumerate(ref_splitmix_sequence(seed, dim)):
            acc[i] += ref_unit_interval(u)
    if all(v == 0.0 for v in acc):
        acc = [1.0] + [0.0] * (dim - 1)
    norm = math.sqrt(math.fsum(v * v for v in acc))
    unit = [v / norm for v in acc]
    return struct.pack(f"<{dim}f", *unit)


# -- percentile oracle -----------------------------------------------------


def ref_chunk_limit(lengths, percentile=0.75, hard_max=8000, floor=200) -> int:
    data = sorted(lengths)
    c = percentile * len(data)
    rank = int(c)
    if rank != c:
        rank += 1
    value = data[rank - 1]
    if value < floor:
        return floor
    if value > hard_max:
        return hard_max
    return value


# -- retrieval oracle ---------------------------------------------------------


def brute_force_topk(records, query, k):
    """records: [(chunk_id, [float components])]; query: [float components].

    Sequential float64 dot products, sorted by (-score, insertion position).
    Returns [(chunk_id, score)].
    """
    scored = []
    for pos, (chunk_id, components) in enumerate(records):
        s = 0.0
        for a, b in zip(components, query):
            s += a * b
        scored.append((chunk_id, s, pos))
    scored.sort(key=lambda t: (-t[1], t[2]))
    return [(cid, s) for cid, s, _ in scored[:k]]


# -- calibration oracle --------------------------------------------------------


def ref_best_threshold(labeled) -> float:
    """Scan candidate thresholds descending, keeping ties, so the smallest
    tied threshold wins; float F1 arithmetic."""
    n_rel = sum(1 for _, r in labeled if r)
    best_t = None
    best_f1 = -1.0
    for t in sorted({s for s, _ in labeled}, reverse=True):
        tp = sum(1 for s, r in labeled if r and s >= t)
        fp = sum(1 for s, r in labeled if not r and s >= t)
        fn = n_rel - tp
        f1 = 2 * tp / (2 * tp + fp + fn)
        if f1 >= best_f1:
            best_f1 = f1
            best_t = t
    return best_t


# -- text helpers -----------------------------------------------------------


def flat_norm(text: str) -> str:
    return " ".join(text.split())


_LEXICON = (
    "access control password device network segment firewall policy "
    "standard audit retention encryption traffic monitor gateway account "
    "operator credential rotation vlan baseline requirement interface "
    "management remote session timeout directory collector event log"
).split()


def random_sentence(rng: random.Random, n_words=None) -> str:
    n = n_words or rng.randint(3, 18)
    words = [rng.choice(_LEXICON) for _ in range(n)]
    words[0] = words[0].capitalize()
    return " ".join(words) + "."


def random_paragraph(rng: random.Random) -> str:
    return " ".join(random_sentence(rng) for _ in range(rng.randint(1, 8)))


def make_random_document(rng: random.Random) -> str:
    """Structured plaintext: numbered headings, optional subsections,
    blank-line separated single-line paragraphs, sometimes a preamble."""
    lines: list[str] = []
    if rng.random() < 0.5:
        for _ in range(rng.randint(1, 3)):
            lines.append(random_paragraph(rng))
            lines.append("")
    for top in range(1, rng.randint(3, 8)):
        title = " ".join(rng.choice(_LEXICON).capitalize() for _ in range(2))
        lines.append(f"{top} {title}")
        lines.append("")
        for _ in range(rng.randint(0, 4)):
            lines.append(random_paragraph(rng))
            lines.append("")
        for sub in range(1, rng.randint(0, 4) + 1):
            lines.append(f"{top}.{sub} {rng.choice(_LEXICON).capitalize()} rules")
            lines.append("")
            for _ in range(rng.randint(1, 5)):
                lines.append(random_paragraph(rng))
                lines.append("")
    return "\n".join(lines)


# -- corpus fixtures -----------------------------------------------------------

DOC_A_TEXT = """INTRODUCTION

This standard sets the baseline for password handling across managed
network devices. It applies to all administrative interfaces.

5 Access Control

5.1 Accounts

Shared accounts are prohibited on all network equipment. Each operator
must authenticate with an individual account tied to the central
directory service.

5.1.2 Password Requirements

Passwords for device X and all other managed devices must be rotated
every 90 days. Minimum length is 14 characters. Reuse of the previous
ten passwords is not permitted. Emergency break-glass credentials are
stored in the sealed-envelope process described in section 7.

6 Logging

All authentication events must be forwarded to the central collector
within five minutes. Retention is one year.
"""

DOC_B_TEXT = """1 Scope

This document defines encryption duties for data in transit on the
corporate network and for stored configuration backups.

2 Transport Encryption

All management traffic must use TLS 1.2 or later. Self-signed
certificates are not allowed on production listeners.

2.1 Key Handling

Private keys are generated on the device and never exported. Key
rotation follows the quarterly maintenance window.

3 Storage Encryption

Configuration backups must be encrypted at rest with keys held in the
central vault.
"""


def build_sample_corpus(engine) -> dict:
    """Ingest the two fixture documents and build the index."""
    a = engine.ingest("Device Security Baseline", "Standard B", "plaintext", DOC_A_TEXT)
    b = engine.ingest("Encryption Duties", "Standard A", "plaintext", DOC_B_TEXT)
    built = engine.rebuild_index()
    return {"doc_a": a, "doc_b": b, "index": built}
