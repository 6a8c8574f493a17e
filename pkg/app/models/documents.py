# app/models/documents.py
from __future__ import annotations

from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.enums import Scale


class PotentialDocument(BaseModel):
    """
    Потенциал во входном файле: либо таблица 'слово' -> значение над алфавитом d,
    либо квадратная матрица e^{A(ij)} (только в шкале exp).
    """

    model_config = ConfigDict(extra="forbid")

    alphabet: Optional[int] = Field(default=None, ge=2)
    scale: Scale = Scale.LOG
    table: Optional[Dict[str, float]] = None
    matrix: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def _one_representation(self) -> "PotentialDocument":
        if (self.table is None) == (self.matrix is None):
            raise ValueError("нужно ровно одно из полей 'table' или 'matrix'")
        if self.table is not None and self.alphabet is None:
            raise ValueError("для 'table' обязательно поле 'alphabet'")
        if self.matrix is not None and self.scale != Scale.EXP:
            raise ValueError("'matrix' задаёт e^{A(ij)}: допустима только шкала 'exp'")
        return self


class CostDocument(BaseModel):
    """Пара матриц стоимости 2x2 и мера μ = (p, 1 - p) на X = {1, 2}."""

    model_config = ConfigDict(extra="forbid")

    C1: List[List[float]]
    C2: List[List[float]]
    p: float
    scale: Scale = Scale.EXP
