# app/datasources/files.py
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List

from app.datasources.base import DocumentSource, ReportSource
from app.errors import ConfigError
from app.models.report import REPORT_COLUMNS, ReportRow

logger = logging.getLogger(__name__)


def _cell_str(row: dict, key: str) -> str:
    """
    Безопасно достаём значение колонки CSV и приводим к строке без пробелов по краям.
    """
    value = row.get(key)
    if value is None:
        return ""
    return str(value).strip()


@dataclass
class JsonDocumentSource(DocumentSource):
    path: str

    def fetch_document(self) -> Dict[str, Any]:
        """
        Читает JSON-документ входных данных. Ожидается один из видов:
        - потенциал: {"alphabet": d, "scale": "log"|"exp", "table": {"12": ...}}
          или {"scale": "exp", "matrix": [[...], ...]}
        - стоимость: {"C1": [[..],[..]], "C2": [[..],[..]], "p": ..., "scale": "exp"|"log"}
        """
        logger.info("Чтение входного документа: %s", self.path)
        path = Path(self.path)
        if not path.is_file():
            raise ConfigError(f"Входной файл не найден: {self.path}")
        try:
            with path.open(encoding="utf-8") as fh:
                document = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Файл {self.path} не является корректным JSON: {e}") from e
        if not isinstance(document, dict):
            raise ConfigError(f"Корень документа {self.path} должен быть объектом")
        return document


@dataclass
class CsvReportSource(ReportSource):
    path: str

    def fetch_rows(self) -> List[ReportRow]:
        """
        Читает CSV-отчёт; строки-комментарии '#' (конфиг запуска) пропускаются.
        """
        logger.info("Чтение отчёта: %s", self.path)
        path = Path(self.path)
        if not path.is_file():
            raise ConfigError(f"Файл отчёта не найден: {self.path}")

        with path.open(encoding="utf-8", newline="") as fh:
            lines = [line for line in fh if not line.startswith("#")]
        reader = csv.DictReader(lines)
        missing = [c for c in REPORT_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ConfigError(f"В отчёте {self.path} нет колонок: {', '.join(missing)}")

        rows = [ReportRow(**{c: _cell_str(r, c) for c in REPORT_COLUMNS}) for r in reader]
        logger.debug("Прочитано %d строк(и) отчёта из %s", len(rows), self.path)
        return rows
