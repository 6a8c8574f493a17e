from __future__ import annotations
from typing import Iterable, Sequence


def format_word(symbols: Iterable[int]) -> str:
    """(1, 2, 1) -> '121'. Пустое слово -> ''."""
    return "".join(str(s) for s in symbols)


def fmt(value: float) -> str:
    """
    Стабильное текстовое представление числа для CSV:
    одинаковый вход даёт байт-в-байт одинаковый вывод.
    """
    return f"{float(value):.12g}"


def format_matrix(rows: Sequence[Sequence[float]]) -> str:
    return "[" + ", ".join("[" + ", ".join(fmt(v) for v in row) + "]" for row in rows) + "]"
