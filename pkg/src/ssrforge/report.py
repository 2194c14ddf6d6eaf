"""Report rendering: aligned text table, JSON, per-record CSV, bar-chart figure.

The evaluation CLI writes all four next to each other so the same run feeds
human review (txt, png), CI assertions (json), and spreadsheet digging (csv).
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .bench import ScoreReport

TASK_ORDER = ("grounding", "counting", "jigsaw")


def report_to_json_dict(report: ScoreReport) -> dict:
    return {
        "mode": report.mode,
        "total": report.total,
        "overall": report.overall,
        "per_task": report.per_task,
        "per_subtype": report.per_subtype,
        "missing": report.missing,
        "unparseable": report.unparseable,
        "prediction_errors": list(report.prediction_errors),
    }


def render_text(report: ScoreReport) -> str:
    """Aligned per-subtype table with task and overall means."""
    lines = [f"mode: {report.mode}    records: {report.total}", ""]
    name_w = max([len(k) for k in report.per_subtype] + [len("overall")]) + 2
    lines.append(f"{'cell':<{name_w}}{'mean':>8}{'n':>8}")
    lines.append("-" * (name_w + 16))
    for task in TASK_ORDER:
        subtype_keys = [k for k in report.per_subtype if k.startswith(f"{task}/")]
        if not subtype_keys:
            continue
        for key in subtype_keys:
            cell = report.per_subtype[key]
            lines.append(f"{key:<{name_w}}{cell['mean']:>8.1f}{cell['n']:>8}")
        agg = report.per_task[task]
        lines.append(f"{task + ' (all)':<{name_w}}{agg['mean']:>8.1f}{agg['n']:>8}")
        lines.append("-" * (name_w + 16))
    lines.append(f"{'overall':<{name_w}}{report.overall:>8.1f}{report.total:>8}")
    lines.append("")
    lines.append(f"missing predictions: {report.missing}")
    lines.append(f"unparseable predictions: {report.unparseable}")
    for err in report.prediction_errors:
        lines.append(f"bad prediction line: {err}")
    return "\n".join(lines) + "\n"


def write_csv(report: ScoreReport, path: str | Path) -> None:
    """Per-record scores as delimited rows."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["record_id", "task", "subtype", "difficulty", "smooth", "strict", "missing", "unparseable"]
        )
        for row in report.rows:
            writer.writerow(
                [
                    row.record_id,
                    row.task,
                    row.subtype,
                    row.difficulty,
                    f"{row.smooth:.6f}",
                    f"{row.strict:.6f}",
                    int(row.missing),
                    int(row.unparseable),
                ]
            )


def write_figure(report: ScoreReport, path: str | Path) -> None:
    """Horizontal bar chart of per-subtype means (0-100)."""
    keys = list(report.per_subtype)
    means = [report.per_subtype[k]["mean"] for k in keys]
    colors = []
    palette = {"grounding": "#4c72b0", "counting": "#dd8452", "jigsaw": "#55a868"}
    for key in keys:
        colors.append(palette.get(key.split("/")[0], "#777777"))
    fig, ax = plt.subplots(figsize=(8, max(2.5, 0.45 * len(keys) + 1.5)))
    ypos = range(len(keys))
    ax.barh(ypos, means, color=colors)
    ax.set_yticks(list(ypos), labels=keys)
    ax.invert_yaxis()
    ax.set_xlim(0, 100)
    ax.set_xlabel(f"mean {report.mode} score (0-100)")
    ax.set_title(f"per-cell means — overall {report.overall:.1f}")
    for y, mean in zip(ypos, means):
        ax.text(mean + 1.0, y, f"{mean:.1f}", va="center", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report_files(report: ScoreReport, out_dir: str | Path) -> dict[str, Path]:
    """Write report.{json,txt,csv,png} into out_dir; returns the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "json": out_dir / "report.json",
        "txt": out_dir / "report.txt",
        "csv": out_dir / "report.csv",
        "png": out_dir / "report.png",
    }
    with open(paths["json"], "w", encoding="utf-8") as fh:
        json.dump(report_to_json_dict(report), fh, indent=2)
        fh.write("\n")
    with open(paths["txt"], "w", encoding="utf-8") as fh:
        fh.write(render_text(report))
    write_csv(report, paths["csv"])
    write_figure(report, paths["png"])
    return paths
