"""Rendering of evaluation reports.

Three surfaces: an aligned plain-text table for humans (values shown as
percentages), machine-readable ``dataset metric value ci_low ci_high
coverage n`` lines with raw fractions, and an optional matplotlib figure
with the confidence intervals drawn as error bars.
"""

import math

from .evaluation import EvalReport

_METRIC_TITLES = {"acc1": "Acc@1", "acc5": "Acc@5", "rho": "Spearman"}


def _pct(value: float) -> str:
    if math.isnan(value):
        return "n/a"
    return f"{100.0 * value:.1f}"


def format_table(reports: list[EvalReport]) -> str:
    """Aligned table, one row per metric, percentages with 95% CIs."""
    rows = [("Dataset", "Metric", "Value", "95% CI", "Cover", "N")]
    for report in reports:
        for metric in report.metrics:
            rows.append((
                report.dataset,
                _METRIC_TITLES.get(metric.name, metric.name),
                _pct(metric.value),
                f"[{_pct(metric.ci_low)}, {_pct(metric.ci_high)}]",
                f"{report.coverage:.3f}",
                str(report.n_evaluated),
            ))
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = []
    for row in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines)


def machine_lines(report: EvalReport) -> list[str]:
    """One raw-fraction line per metric for scripted consumers."""
    lines = []
    for metric in report.metrics:
        lines.append(
            f"{report.dataset} {metric.name} {metric.value:.6f} "
            f"{metric.ci_low:.6f} {metric.ci_high:.6f} "
            f"{report.coverage:.6f} {report.n_evaluated}"
        )
    return lines


def write_delimited(reports: list[EvalReport], path):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("dataset metric value ci_low ci_high coverage n\n")
        for report in reports:
            for line in machine_lines(report):
                handle.write(line + "\n")


def render_figure(reports: list[EvalReport], path, dpi: int = 150):
    """Bar chart of all metrics with CI whiskers, written to ``path``.

    Uses the object-oriented matplotlib API so no global backend state
    is touched.
    """
    from matplotlib.figure import Figure

    labels = []
    values = []
    err_low = []
    err_high = []
    for report in reports:
        for metric in report.metrics:
            labels.append(
                f"{report.dataset}\n{_METRIC_TITLES.get(metric.name, metric.name)}"
            )
            value = 0.0 if math.isnan(metric.value) else metric.value
            values.append(value)
            err_low.append(max(value - metric.ci_low, 0.0)
                           if not math.isnan(metric.ci_low) else 0.0)
            err_high.append(max(metric.ci_high - value, 0.0)
                            if not math.isnan(metric.ci_high) else 0.0)

    fig = Figure(figsize=(max(4.0, 1.2 * len(labels) + 1.5), 4.0))
    ax = fig.subplots()
    positions = range(len(labels))
    ax.bar(positions, values, color="#4878a8",
           yerr=[err_low, err_high], capsize=4)
    ax.set_xticks(list(positions))
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylabel("metric value")
    ax.set_ylim(min(0.0, min(values, default=0.0)), 1.05)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
