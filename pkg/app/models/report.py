# app/models/report.py
from __future__ import annotations

from dataclasses import dataclass

# Порядок колонок CSV-отчёта фиксирован
REPORT_COLUMNS = ("run_id", "mode", "function_id", "value", "ci_halfwidth", "n", "seed", "residuals")


@dataclass(slots=True)
class ReportRow:
    """
    Одна строка отчёта. Числа уже отформатированы (app.utils.text.fmt),
    чтобы одинаковый запуск давал байт-в-байт одинаковый CSV.
    seed пустой у слитых по репликам строк и у точных значений.
    """
    run_id: str
    mode: str
    function_id: str
    value: str
    ci_halfwidth: str = "0"
    n: str = ""
    seed: str = ""
    residuals: str = ""

    @property
    def is_merged(self) -> bool:
        return self.seed == ""

    def value_float(self) -> float:
        return float(self.value)

    def ci_float(self) -> float:
        return float(self.ci_halfwidth or 0)
