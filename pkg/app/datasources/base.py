# app/datasources/base.py
from __future__ import annotations
from typing import Any, Dict, List

from app.models.report import ReportRow


class DocumentSource:
    """
    Абстрактный источник входного документа (потенциал или пара стоимостей).
    """
    def fetch_document(self) -> Dict[str, Any]:
        raise NotImplementedError


class ReportSource:
    """
    Абстрактный источник строк отчёта (для compare).
    """
    def fetch_rows(self) -> List[ReportRow]:
        raise NotImplementedError
