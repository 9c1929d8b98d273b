"""Utility helpers for parsing command arguments and formatting command output."""

from typing import Any, Optional, Sequence

from strand.models.schemas import BenchRow
from strand.services.bench_service import ScalingStep


def parse_inputs(text: str) -> list[str]:
    """Split a comma-separated ``--inputs`` value, dropping blanks.

    Values are kept as strings; the interpretation decides how to read them.
    """
    return [part.strip() for part in text.split(",") if part.strip()]


def format_value(value: Any) -> str:
    """Render one evaluation result: floats compactly, fractions as ``p/q``, anything else with ``str``."""
    if isinstance(value, float):
        return f"{value:.1f}" if value.is_integer() else repr(value)
    return str(value)


def format_outputs(values: Sequence[Any]) -> str:
    return ",".join(format_value(v) for v in values)


def format_table(headers: Sequence[str], rows: Sequence[Sequence[Any]], title: Optional[str] = None) -> str:
    """Build a plain aligned text table.

    Args:
        headers: Column titles.
        rows: Table cells, one list per row.
        title: Optional line printed above the table.

    Returns:
        A multi-line string with columns padded to their widest cell.
    """
    cells = [[str(h) for h in headers]] + [[str(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines: list[str] = [title, ""] if title else []
    for k, row in enumerate(cells):
        lines.append("  ".join(c.rjust(w) if k and _numeric(c) else c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _numeric(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def format_bench_rows(rows: Sequence[BenchRow], title: Optional[str] = None) -> str:
    return format_table(
        ["shape", "leaves", "phase", "median ms"],
        [[r.shape, r.leaves, r.phase, f"{r.median_ms:.3f}"] for r in rows],
        title=title,
    )


def format_checks(results: dict[str, bool], details: Optional[dict[str, str]] = None) -> str:
    """One ``name=true|false`` line per check, followed by the reason when it failed."""
    details = details or {}
    lines = []
    for name, ok in results.items():
        line = f"{name}={'true' if ok else 'false'}"
        if not ok and details.get(name):
            line += f"  # {details[name]}"
        lines.append(line)
    return "\n".join(lines)


def format_scaling(steps: Sequence[ScalingStep]) -> str:
    return format_table(
        ["shape", "N", "next N", "ratio"],
        [[s.shape, s.small, s.large, "n/a" if s.ratio is None else f"{s.ratio:.2f}"] for s in steps],
    )
