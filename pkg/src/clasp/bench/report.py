"""Report writers: delimited tables, markdown, and figures."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

RESULT_COLUMNS = ("task", "family", "category", "trials", "successes", "success_rate_pct", "mean_score")


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def write_results_csv(rows: list[dict], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in RESULT_COLUMNS])


def write_results_markdown(rows: list[dict], path: Path) -> None:
    lines = [
        "| Task | Family | Category | Trials | Success rate (%) | Mean score |",
        "|---|---|---|---:|---:|---:|",
    ]
    for row in rows:
        lines.append(
            f"| {row['task']} | {row['family']} | {row['category']} | {row['trials']} "
            f"| {row['success_rate_pct']:.1f} | {row['mean_score']:.4f} |"
        )
    path.write_text("\n".join(lines) + "\n")


def plot_success_rates(rows: list[dict], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(max(6, 0.55 * len(rows)), 4))
    names = [row["task"] for row in rows]
    rates = [row["success_rate_pct"] for row in rows]
    ax.bar(range(len(rows)), rates, color="#4878d0")
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(names, rotation=60, ha="right", fontsize=8)
    ax.set_ylabel("success rate (%)")
    ax.set_ylim(0, 100)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_report(rows: list[dict], out_dir: Path) -> None:
    out_dir = Path(out_dir)
    write_results_csv(rows, out_dir / "results.csv")
    write_results_markdown(rows, out_dir / "results.md")
    plot_success_rates(rows, out_dir / "results.png")


# --- ablation ----------------------------------------------------------------

ABLATION_COLUMNS = ("mask_ratio", "mode", "seed", "akd_px", "map")


def write_ablation_csv(cells: list[dict], path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ABLATION_COLUMNS)
        for cell in cells:
            writer.writerow([_fmt(cell[c]) for c in ABLATION_COLUMNS])


def plot_ablation(cells: list[dict], path: Path) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    modes = sorted({c["mode"] for c in cells})
    for mode in modes:
        pts = sorted((c["mask_ratio"], c["akd_px"], c["map"]) for c in cells if c["mode"] == mode)
        ratios = [p[0] for p in pts]
        axes[0].plot(ratios, [p[1] for p in pts], marker="o", label=mode)
        axes[1].plot(ratios, [p[2] for p in pts], marker="o", label=mode)
    axes[0].set_xlabel("masking ratio")
    axes[0].set_ylabel("AKD (px)")
    axes[1].set_xlabel("masking ratio")
    axes[1].set_ylabel("MAP")
    for ax in axes:
        ax.grid(alpha=0.3)
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
