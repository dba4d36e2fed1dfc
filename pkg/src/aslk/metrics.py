"""Specification-size metrics: effective line counts and reduction ratios."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Sequence

from aslk.diagnostics import AslError, Diagnostic

COMMENT_PREFIXES = ("//", "#")


def count_effective_lines(text: str) -> int:
    """Count lines that hold something other than whitespace or a comment."""
    count = 0
    for line in text.splitlines():
        stripped = line.strip()
        if stripped and not stripped.startswith(COMMENT_PREFIXES):
            count += 1
    return count


def round_half_up(value: Fraction, places: int = 2) -> Decimal:
    """Round an exact rational to ``places`` decimals, ties away from zero."""
    scale = 10**places
    magnitude = math.floor(abs(value) * scale + Fraction(1, 2))
    sign = -1 if value < 0 else 1
    return Decimal(sign * magnitude).scaleb(-places)


def _ratio(asl: int, k: int) -> Decimal:
    if k == 0:
        raise AslError(Diagnostic.error("DIVISION_BY_ZERO", "K line count is zero; no ratio can be formed"))
    return round_half_up(100 * (1 - Fraction(asl, k)))


def reduction_ratio(asl: int, k: int) -> Decimal:
    """Percentage of K lines saved by writing ``asl`` lines instead, e.g. ``(16, 64) -> 75.00``.

    Raises:
        AslError: ``DIVISION_BY_ZERO`` when ``k`` is 0.
    """
    return _ratio(asl, k)


@dataclass(frozen=True)
class MetricsRow:
    label: str
    asl_lines: int
    k_lines: int

    @property
    def reduction_pct(self) -> Decimal:
        return reduction_ratio(self.asl_lines, self.k_lines)


def aggregate_reduction(rows: Sequence[MetricsRow]) -> Decimal:
    """Line-weighted reduction over all rows: ``1 - sum(asl) / sum(k)``.

    This is not the mean of the per-row percentages.

    Raises:
        AslError: ``EMPTY_INPUT`` when ``rows`` is empty.
    """
    if not rows:
        raise AslError(Diagnostic.error("EMPTY_INPUT", "no rows to aggregate"))
    return _ratio(sum(r.asl_lines for r in rows), sum(r.k_lines for r in rows))


HEADER = ("Label", "Code Lines(ASL)", "Code Lines(K)", "Reduction Ratio(%)")


def _cells(rows: Sequence[MetricsRow]) -> list[tuple[str, str, str, str]]:
    body = [(r.label, str(r.asl_lines), str(r.k_lines), str(r.reduction_pct)) for r in rows]
    total = ("TOTAL", str(sum(r.asl_lines for r in rows)), str(sum(r.k_lines for r in rows)), str(aggregate_reduction(rows)))
    return body + [total]


def format_table(rows: Sequence[MetricsRow]) -> str:
    """Aligned plain-text table with a trailing aggregate row."""
    cells = [HEADER] + _cells(rows)
    widths = [max(len(row[i]) for row in cells) for i in range(len(HEADER))]
    out = []
    for n, row in enumerate(cells):
        first = row[0].ljust(widths[0])
        rest = [cell.rjust(w) for cell, w in zip(row[1:], widths[1:])]
        out.append("  ".join([first, *rest]).rstrip())
        if n == 0 or n == len(cells) - 2:
            out.append("-" * (sum(widths) + 2 * (len(widths) - 1)))
    return "\n".join(out) + "\n"


def format_csv(rows: Sequence[MetricsRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    writer.writerows(_cells(rows))
    return buf.getvalue()
