"""Compliance-auditing assistant engine.

Ingests standards documents, recovers their section structure, splits them
into retrieval-sized chunks, indexes them in an exact-cosine vector store,
interprets auditor questions into (policy, standard, subject) slots with a
human confirmation step, and composes cited answers.  Every model-backed
step has a deterministic offline mock so the full pipeline runs without
network access.
"""

__version__ = "0.1.0"
