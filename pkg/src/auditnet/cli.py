"""Command-line interface.

stdout carries machine-readable output only (JSON, or answer markdown for
the interactive chat); prompts, progress, and errors go to stderr.  Exit
codes: 0 success, 1 usage, 2 data or provider failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import evalkit
from .engine import Engine
from .errors import AuditNetError
from .interpreter import Interpretation, confirm

log = logging.getLogger("auditnet")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

_MD_SUFFIXES = {".md", ".markdown"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="auditnet",
        description="Compliance-auditing assistant over network-security standards.",
    )
    parser.add_argument(
        "--data-dir",
        default=None,
        help="corpus directory (default: AUDITNET_DATA_DIR or ./auditnet_data)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="register documents and chunk them")
    p.add_argument("paths", nargs="+", help="document files to ingest")
    p.add_argument("--standard", required=True, help="standard name for these documents")
    p.add_argument("--title", default=None, help="title override (single file only)")
    p.add_argument(
        "--format",
        choices=["plaintext", "markdown"],
        default=None,
        help="input format (default: by file extension)",
    )

    sub.add_parser("index", help="re-chunk, embed, and write the index snapshot")

    p = sub.add_parser("stats", help="section length statistics and chunk limits")
    p.add_argument("--buckets", type=int, default=20)
    p.add_argument(
        "--report-dir",
        default=None,
        help="also write CSV tables and histogram figures into this directory",
    )

    p = sub.add_parser("calibrate", help="fit similarity thresholds from labels")
    p.add_argument(
        "--labels",
        required=True,
        help='JSON file: [{"query", "chunk_id", "relevant"}, ...]',
    )

    p = sub.add_parser("eval", help="run slot and retrieval evaluation")
    p.add_argument("--dataset", default=None, help="JSONL dataset of eval cases")
    p.add_argument("--k", type=int, default=10, help="retrieval cutoff")
    p.add_argument(
        "--write-fixture-dataset",
        default=None,
        metavar="PATH",
        help="expand the packaged templates (plus 10 paraphrases each) to PATH and exit",
    )

    p = sub.add_parser("query", help="one question through the full pipeline")
    p.add_argument("text", help="the compliance question")
    p.add_argument("--yes", action="store_true", help="confirm the interpretation as-is")
    p.add_argument("--k", type=int, default=None, help="retrieval cutoff")

    p = sub.add_parser("chat", help="interactive question loop")
    p.add_argument("--yes", action="store_true", help="confirm every interpretation as-is")

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)

    return parser


def _emit(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, indent=2, ensure_ascii=False) + "\n")


def _infer_format(path: Path, explicit: str | None) -> str:
    if explicit:
        return explicit
    return "markdown" if path.suffix.lower() in _MD_SUFFIXES else "plaintext"


def _cmd_ingest(engine: Engine, args) -> int:
    if args.title and len(args.paths) > 1:
        log.error("--title is only valid with a single input file")
        return EXIT_USAGE
    results = []
    for raw in args.paths:
        path = Path(raw)
        content = path.read_text(encoding="utf-8")
        result = engine.ingest(
            title=args.title or path.stem,
            standard_name=args.standard,
            format=_infer_format(path, args.format),
            content=content,
        )
        log.info("ingested %s: %d chunks", result["doc_id"], result["n_chunks"])
        results.append(result)
    _emit({"documents": results})
    return EXIT_OK


def _cmd_stats(engine: Engine, args) -> int:
    payload = engine.stats(n_buckets=args.buckets)
    if args.report_dir:
        from . import report

        created = report.write_stats_report(payload, args.report_dir)
        payload["report_files"] = [str(p) for p in created]
        log.info("wrote %d report files to %s", len(created), args.report_dir)
    _emit(payload)
    return EXIT_OK


def _cmd_calibrate(engine: Engine, args) -> int:
    labels = json.loads(Path(args.labels).read_text(encoding="utf-8"))
    _emit(engine.calibrate(labels))
    return EXIT_OK


def _cmd_eval(engine: Engine, args) -> int:
    if args.write_fixture_dataset:
        base = evalkit.expand_templates(evalkit.fixture_templates())
        paraphraser = evalkit.MockParaphraser()
        cases = list(base)
        for case in base:
            cases.extend(evalkit.augment(case, 10, paraphraser))
        evalkit.save_dataset(cases, args.write_fixture_dataset)
        _emit({"cases_written": len(cases), "path": args.write_fixture_dataset})
        return EXIT_OK
    if not args.dataset:
        log.error("eval requires --dataset (or --write-fixture-dataset)")
        return EXIT_USAGE
    cases = evalkit.load_dataset(args.dataset)
    payload: dict = {"slots": engine.evaluate_slots(cases).to_json()}
    by_id = {c.case_id: c for c in cases}
    pairs = []
    for line in Path(args.dataset).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        if rec.get("gold_chunk_id"):
            pairs.append((by_id[rec["case_id"]], rec["gold_chunk_id"]))
    if pairs:
        result = evalkit.evaluate_retrieval(
            pairs, engine.index, engine.config.embed, k=args.k
        )
        payload["retrieval"] = result.to_json()
    _emit(payload)
    return EXIT_OK


def _show_interpretation(interpretation: Interpretation) -> None:
    sys.stderr.write(
        "interpreted: policy={0!r} standard={1!r} subject={2!r} (source: {3})\n".format(
            interpretation.policy,
            interpretation.standard,
            interpretation.subject,
            interpretation.source,
        )
    )


def _prompt_edits(interpretation: Interpretation) -> dict | None:
    """Ask whether to confirm; returns edits mapping, or None to abort."""
    while True:
        sys.stderr.write("confirm interpretation? [y]es / [e]dit / [n]o: ")
        sys.stderr.flush()
        choice = sys.stdin.readline().strip().lower()
        if choice in ("y", "yes", ""):
            return {}
        if choice in ("n", "no"):
            return None
        if choice in ("e", "edit"):
            edits: dict = {}
            for slot in ("policy", "standard", "subject"):
                current = getattr(interpretation, slot)
                sys.stderr.write(f"{slot} [{current or ''}] (blank keeps, '-' clears): ")
                sys.stderr.flush()
                entered = sys.stdin.readline().rstrip("\n")
                if entered == "-":
                    edits[slot] = None
                elif entered.strip():
                    edits[slot] = entered.strip()
            return edits


def _answer_once(engine: Engine, text: str, auto_confirm: bool, k: int | None):
    interpretation = engine.interpret(text)
    _show_interpretation(interpretation)
    if auto_confirm:
        edits: dict | None = {}
    else:
        edits = _prompt_edits(interpretation)
    if edits is None:
        return None
    confirmed = confirm(interpretation, edits)
    return engine.answer(confirmed, k=k)


def _cmd_query(engine: Engine, args) -> int:
    bundle = _answer_once(engine, args.text, args.yes, args.k)
    if bundle is None:
        _emit({"aborted": True})
        return EXIT_OK
    _emit(bundle.to_json())
    return EXIT_OK


def _cmd_chat(engine: Engine, args) -> int:
    sys.stderr.write("auditnet chat; empty line or EOF exits\n")
    while True:
        sys.stderr.write("> ")
        sys.stderr.flush()
        line = sys.stdin.readline()
        if not line or not line.strip():
            return EXIT_OK
        try:
            bundle = _answer_once(engine, line.strip(), args.yes, None)
        except AuditNetError as exc:
            sys.stderr.write(f"error: {exc}\n")
            continue
        if bundle is None:
            sys.stderr.write("discarded\n")
            continue
        sys.stdout.write(bundle.rendered_markdown + "\n\n")
        sys.stdout.flush()


def _cmd_serve(engine: Engine, args) -> int:
    import uvicorn

    from .server import create_app

    uvicorn.run(create_app(engine), host=args.host, port=args.port)
    return EXIT_OK


_HANDLERS = {
    "ingest": _cmd_ingest,
    "stats": _cmd_stats,
    "calibrate": _cmd_calibrate,
    "eval": _cmd_eval,
    "query": _cmd_query,
    "chat": _cmd_chat,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        engine = Engine.from_env(args.data_dir)
        if args.command == "index":
            _emit(engine.rebuild_index())
            return EXIT_OK
        return _HANDLERS[args.command](engine, args)
    except (AuditNetError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
