"""File emitters: trace CSVs, round logs, summary tables, and figures.

Every delimited output has a loss-free reader next to its writer so the
test suite can round-trip files; figures are rendered headlessly to PNG
next to the delimited output they visualize.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .eoc import LogEntry, parse_log_line
from .epidemic import EpidemicTrace, RoundSummary
from .situation import STATE_FIELDS, Situation

TRACE_HEADER = ("day", "S", "E", "I", "II", "R", "IM", "D")
SUMMARY_FIELDS = (
    "round", "peak_day", "peak_prev", "attack", "deaths", "cost",
    "certainty", "successfulness", "stored_case_id",
)

STATE_COLORS = {
    "S": "tab:blue", "E": "tab:orange", "I": "tab:red", "II": "tab:purple",
    "R": "tab:green", "IM": "tab:cyan", "D": "black",
}


def write_trace_csv(trace: EpidemicTrace, path: str | Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(TRACE_HEADER)
        writer.writerows(trace.csv_rows())


def read_trace_csv(path: str | Path) -> list[Situation]:
    situations = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if tuple(header) != TRACE_HEADER:
            raise ValueError(f"unexpected trace header {header}")
        for row in reader:
            day, *counts = (int(cell) for cell in row)
            situations.append(Situation(**dict(zip(STATE_FIELDS, counts))))
    return situations


def write_round_log(log: list[LogEntry], path: str | Path) -> None:
    Path(path).write_text("".join(entry.render() + "\n" for entry in log))


def read_round_log(path: str | Path) -> list[LogEntry]:
    lines = Path(path).read_text().splitlines()
    return [parse_log_line(line) for line in lines if line.strip()]


def _summary_row(summary: RoundSummary) -> list[str]:
    return [
        str(summary.round_index),
        str(summary.peak_day),
        repr(summary.peak_prevalence),
        repr(summary.attack_fraction),
        str(summary.deaths),
        repr(summary.total_cost),
        repr(summary.plan_certainty),
        "" if summary.realized_successfulness is None
        else repr(summary.realized_successfulness),
        "" if summary.stored_case_id is None else str(summary.stored_case_id),
    ]


def write_summary_csv(summaries: list[RoundSummary], path: str | Path) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(SUMMARY_FIELDS)
        for summary in summaries:
            writer.writerow(_summary_row(summary))


def read_summary_csv(path: str | Path) -> list[RoundSummary]:
    summaries = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if tuple(header) != SUMMARY_FIELDS:
            raise ValueError(f"unexpected summary header {header}")
        for row in reader:
            summaries.append(RoundSummary(
                round_index=int(row[0]),
                peak_day=int(row[1]),
                peak_prevalence=float(row[2]),
                attack_fraction=float(row[3]),
                deaths=int(row[4]),
                total_cost=float(row[5]),
                plan_certainty=float(row[6]),
                realized_successfulness=float(row[7]) if row[7] else None,
                stored_case_id=int(row[8]) if row[8] else None,
            ))
    return summaries


def summary_table(summaries: list[RoundSummary]) -> str:
    """Fixed-width text table of round results, one data row per round."""
    if not summaries:
        raise ValueError("need at least one round summary")
    header = f"{'round':>5} {'peak_day':>8} {'peak_prev':>9} {'attack':>7} " \
             f"{'deaths':>6} {'cost':>10} {'certainty':>9} {'successfulness':>14}"
    lines = [header, "-" * len(header)]
    for s in summaries:
        succ = "-" if s.realized_successfulness is None else f"{s.realized_successfulness:.4f}"
        lines.append(
            f"{s.round_index:>5} {s.peak_day:>8} {s.peak_prevalence:>9.4f} "
            f"{s.attack_fraction:>7.4f} {s.deaths:>6} {s.total_cost:>10.2f} "
            f"{s.plan_certainty:>9.4f} {succ:>14}"
        )
    return "\n".join(lines)


def render_trace_figure(trace: EpidemicTrace, path: str | Path, title: str) -> None:
    """Health-state curves over the round, with the prevalence peak marked."""
    days = range(len(trace.situations))
    fig, ax = plt.subplots(figsize=(8, 5))
    for label, attr in zip(TRACE_HEADER[1:], STATE_FIELDS):
        ax.plot(days, [getattr(s, attr) for s in trace.situations],
                label=label, color=STATE_COLORS[label], linewidth=1.5)
    prevalences = [s.prevalent for s in trace.situations]
    peak_day = prevalences.index(max(prevalences))
    ax.axvline(peak_day, color="gray", linestyle="--", linewidth=1,
               label=f"peak day {peak_day}")
    ax.set_xlabel("day")
    ax.set_ylabel("agents")
    ax.set_title(title)
    ax.legend(loc="center right", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_summary_figure(summaries: list[RoundSummary], path: str | Path) -> None:
    """Peak prevalence and plan spend per round."""
    rounds = [s.round_index for s in summaries]
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    top.bar(rounds, [s.peak_prevalence for s in summaries], color="tab:red", alpha=0.7)
    top.set_ylabel("peak prevalence")
    top.grid(True, alpha=0.3)
    bottom.bar(rounds, [s.total_cost for s in summaries], color="tab:blue", alpha=0.7)
    bottom.set_ylabel("total cost")
    bottom.set_xlabel("round")
    bottom.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
