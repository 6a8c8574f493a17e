# app/errors.py
from __future__ import annotations

from typing import Any, Sequence


class ToolkitError(Exception):
    """
    Базовая ошибка тулкита. Каждый класс несёт свой код выхода для CLI.
    """

    exit_code: int = 1


class ConfigError(ToolkitError, ValueError):
    """Конфиг не разбирается или не проходит валидацию."""

    exit_code = 2


class DomainError(ToolkitError, ValueError):
    """Входные данные вне области определения операции."""

    exit_code = 3


class ResourceError(DomainError):
    """Перебор прообразов превышает настольный лимит."""


class NumericalError(ToolkitError, ArithmeticError):
    """
    Численный метод не сошёлся. residual — последняя невязка (если известна).
    """

    exit_code = 4

    def __init__(self, message: str, residual: float | None = None) -> None:
        super().__init__(message)
        self.residual = residual


class StructuralError(NumericalError):
    """Цепь приводима или периодична: стационарное распределение не единственно."""


class InconsistencyError(NumericalError):
    """Две независимые процедуры дали несогласованный результат."""


class InfeasibleError(ToolkitError):
    """
    Ни один кандидат не прошёл фильтр проверок (positive, on_conic, spectral).
    candidates — полный список кандидатов с проваленными условиями.
    """

    exit_code = 5

    def __init__(self, message: str, candidates: Sequence[Any] = ()) -> None:
        super().__init__(message)
        self.candidates = tuple(candidates)
