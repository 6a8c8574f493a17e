# app/services/reports.py
from __future__ import annotations

import csv
import io
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from app.config import Settings
from app.models.chain import Estimate
from app.models.report import REPORT_COLUMNS, ReportRow
from app.models.run_config import RunConfig
from app.utils.text import fmt

log = logging.getLogger(__name__)


def residuals(**items: object) -> str:
    """'key=value;key=value' в порядке аргументов; числа через fmt."""
    parts = []
    for key, value in items.items():
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = fmt(value)
        else:
            text = str(value)
        parts.append(f"{key}={text}")
    return ";".join(parts)


def estimate_row(config: RunConfig, estimate: Estimate) -> ReportRow:
    return ReportRow(
        run_id=config.run_id,
        mode=config.mode.value,
        function_id=estimate.function_id,
        value=fmt(estimate.mean),
        ci_halfwidth=fmt(estimate.ci_halfwidth),
        n=str(estimate.count),
        seed="" if estimate.seed is None else str(estimate.seed),
        residuals=residuals(batches=estimate.batch_count, batch_variance=estimate.batch_variance),
    )


def value_row(
    config: RunConfig, function_id: str, value: float, n: Optional[int] = None, **extra: object
) -> ReportRow:
    """Строка точного (не статистического) значения: ci = 0, seed пустой."""
    return ReportRow(
        run_id=config.run_id,
        mode=config.mode.value,
        function_id=function_id,
        value=fmt(value),
        ci_halfwidth="0",
        n="" if n is None else str(n),
        seed="",
        residuals=residuals(**extra),
    )


def render_csv(config: RunConfig, rows: Sequence[ReportRow]) -> str:
    """
    CSV с шапкой-комментарием: run_id и полный разрешённый конфиг запуска.
    """
    buffer = io.StringIO()
    buffer.write(f"# run_id: {config.run_id}\n")
    buffer.write(f"# config: {config.resolved_json()}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for row in rows:
        writer.writerow([getattr(row, c) for c in REPORT_COLUMNS])
    return buffer.getvalue()


def report_path(settings: Settings, config: RunConfig) -> Path:
    """Относительный output считается от OUTPUT_DIR; без output — '<mode>-<run_id>.csv'."""
    name = config.output or f"{config.mode.value}-{config.run_id}.csv"
    path = Path(name)
    if not path.is_absolute():
        path = Path(settings.output_dir) / path
    return path


def write_report(settings: Settings, config: RunConfig, rows: Iterable[ReportRow]) -> Path:
    rows: List[ReportRow] = list(rows)
    path = report_path(settings, config)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(render_csv(config, rows).encode("utf-8"))
    log.info("Отчёт записан: %s (%d строк)", path, len(rows))
    return path
