"""File reports for corpus statistics: CSV tables and histogram figures.

Renders the section-length distributions that motivate the percentile
chunk limit.  Figures use the Agg backend so reports work headless; CSVs
carry the same numbers for anything downstream of a spreadsheet.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def write_histogram_csv(histogram: dict, path: Path) -> None:
    """Columns: bucket_start, bucket_end, count."""
    edges = histogram["bucket_edges"]
    counts = histogram["counts"]
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bucket_start", "bucket_end", "count"])
        for i, count in enumerate(counts):
            writer.writerow([f"{edges[i]:.2f}", f"{edges[i + 1]:.2f}", count])


def write_documents_csv(per_document: list[dict], path: Path) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["doc_id", "title", "standard_name", "n_sections", "n_chunks", "chunk_limit"]
        )
        for row in per_document:
            writer.writerow(
                [
                    row["doc_id"],
                    row["title"],
                    row["standard_name"],
                    row["n_sections"],
                    row["n_chunks"],
                    row["chunk_limit"],
                ]
            )


def render_histogram_png(histogram: dict, title: str, chunk_limit: int, path: Path) -> None:
    """Bar chart of section lengths with the chunk limit marked."""
    edges = histogram["bucket_edges"]
    counts = histogram["counts"]
    widths = [edges[i + 1] - edges[i] for i in range(len(counts))]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.bar(edges[:-1], counts, width=widths, align="edge", edgecolor="black", linewidth=0.5)
    ax.axvline(chunk_limit, linestyle="--", linewidth=1.2, color="firebrick")
    ax.annotate(
        f"chunk limit = {chunk_limit}",
        xy=(chunk_limit, max(counts) if counts else 1),
        xytext=(5, -5),
        textcoords="offset points",
    )
    ax.set_xlabel("normalized section length (chars)")
    ax.set_ylabel("sections")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_stats_report(stats: dict, out_dir: str | Path) -> list[Path]:
    """Write the full stats report into out_dir and return created paths.

    Produces a corpus-level histogram (CSV + PNG), a per-document summary
    CSV, and one histogram PNG per document.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    created: list[Path] = []

    corpus = stats["corpus"]
    path = out_dir / "corpus_lengths.csv"
    write_histogram_csv(corpus["histogram"], path)
    created.append(path)
    path = out_dir / "corpus_lengths.png"
    render_histogram_png(
        corpus["histogram"],
        f"Section lengths across {corpus['n_documents']} documents",
        corpus["chunk_limit"],
        path,
    )
    created.append(path)

    path = out_dir / "documents.csv"
    write_documents_csv(stats["per_document"], path)
    created.append(path)

    for row in stats["per_document"]:
        path = out_dir / f"lengths_{row['doc_id']}.png"
        render_histogram_png(
            row["histogram"],
            f"Section lengths: {row['title']}",
            row["chunk_limit"],
            path,
        )
        created.append(path)
    return created
