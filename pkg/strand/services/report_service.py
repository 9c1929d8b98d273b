"""XLSX benchmark reports: a phase table per term size and a doubling-ratio sheet."""

import logging
from io import BytesIO
from typing import Optional

from openpyxl import Workbook
from openpyxl.styles import Alignment, Border, Font, PatternFill, Side
from openpyxl.utils import get_column_letter
from openpyxl.worksheet.worksheet import Worksheet

from strand.models.schemas import BenchRow
from strand.services.bench_service import PHASES, ScalingStep, scaling_steps

logger = logging.getLogger(__name__)

# ── Styles ───────────────────────────────────────────────────────────────────

_TITLE_FONT = Font(name="Calibri", size=14, bold=True, color="2B5797")
_HEAD_FONT = Font(name="Calibri", size=11, bold=True, color="FFFFFF")
_HEAD_FILL = PatternFill(start_color="2B5797", end_color="2B5797", fill_type="solid")
_BODY_FONT = Font(name="Calibri", size=10)
_TOTAL_FILL = PatternFill(start_color="D9E2F3", end_color="D9E2F3", fill_type="solid")
_OVER_FILL = PatternFill(start_color="F4CCCC", end_color="F4CCCC", fill_type="solid")
_EDGE = Side(style="thin")
_BOX = Border(left=_EDGE, right=_EDGE, top=_EDGE, bottom=_EDGE)

MS_FORMAT = "0.000"
RATIO_FORMAT = "0.00"
HEADER_ROW = 3


def _table(ws: Worksheet, title: str, headers: list[str], widths: list[int], rows: list[list]) -> None:
    """Title in row 1, styled headers in :data:`HEADER_ROW`, plain cells below."""
    ws.merge_cells(start_row=1, start_column=1, end_row=1, end_column=len(headers))
    ws["A1"] = title
    ws["A1"].font = _TITLE_FONT
    ws["A1"].alignment = Alignment(horizontal="center")

    for col, (text, width) in enumerate(zip(headers, widths), 1):
        head = ws.cell(row=HEADER_ROW, column=col, value=text)
        head.font, head.fill, head.border = _HEAD_FONT, _HEAD_FILL, _BOX
        head.alignment = Alignment(horizontal="center", wrap_text=True)
        ws.column_dimensions[get_column_letter(col)].width = width

    for r, values in enumerate(rows, HEADER_ROW + 1):
        for col, value in enumerate(values, 1):
            cell = ws.cell(row=r, column=col, value=value)
            cell.font, cell.border = _BODY_FONT, _BOX
    ws.freeze_panes = ws.cell(row=HEADER_ROW + 1, column=1)


# ── Sheets ───────────────────────────────────────────────────────────────────

def _phase_sheet(ws: Worksheet, rows: list[BenchRow], title: str) -> None:
    """One line per (shape, leaves), one column per phase; the ``total`` column is shaded."""
    grid: dict[tuple[str, int], dict[str, BenchRow]] = {}
    for row in rows:
        grid.setdefault((row.shape, row.leaves), {})[row.phase] = row

    phases = [p for p in PHASES if any(p in by_phase for by_phase in grid.values())]
    table = []
    for (shape, leaves), by_phase in grid.items():
        runs = next(iter(by_phase.values())).repeat
        table.append([shape, leaves] + [by_phase[p].median_ms if p in by_phase else None for p in phases] + [runs])

    headers = ["Shape", "Leaves"] + [f"{p} (ms)" for p in phases] + ["Runs"]
    _table(ws, title, headers, [12, 10] + [13] * len(phases) + [7], table)

    first = HEADER_ROW + 1
    for offset, phase in enumerate(phases):
        col = 3 + offset
        for r in range(first, first + len(table)):
            ws.cell(row=r, column=col).number_format = MS_FORMAT
            if phase == "total":
                ws.cell(row=r, column=col).fill = _TOTAL_FILL


def _scaling_sheet(ws: Worksheet, steps: list[ScalingStep], limit: float) -> None:
    """Consecutive size pairs with ``t(large) / t(small)``; ratios above *limit* are marked."""
    table = [[s.shape, s.small, s.large, s.ratio] for s in steps]
    _table(ws, f"total time ratios (limit {limit:g})", ["Shape", "N", "Next N", "Ratio"], [12, 10, 10, 9], table)
    for r, step in enumerate(steps, HEADER_ROW + 1):
        cell = ws.cell(row=r, column=4)
        cell.number_format = RATIO_FORMAT
        if step.ratio is not None and step.ratio > limit:
            cell.fill = _OVER_FILL


# ── Public API ───────────────────────────────────────────────────────────────

def generate_bench_report(rows: list[BenchRow], title: Optional[str] = None, limit: float = 2.5) -> BytesIO:
    """Render benchmark rows as an XLSX workbook.

    Args:
        rows: Benchmark rows; several sizes of the same shape add a scaling sheet.
        title: Title of the phase sheet.
        limit: Doubling ratio above which a scaling row is highlighted.

    Returns:
        A BytesIO buffer containing the workbook.
    """
    wb = Workbook()
    phases = wb.active
    phases.title = "Phases"
    _phase_sheet(phases, rows, title or "Elaboration phases")

    steps = scaling_steps(rows)
    if steps:
        _scaling_sheet(wb.create_sheet("Scaling"), steps, limit)

    buffer = BytesIO()
    wb.save(buffer)
    buffer.seek(0)
    logger.debug("generated XLSX report: %d rows, %d scaling steps", len(rows), len(steps))
    return buffer
