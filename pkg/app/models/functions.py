# app/models/functions.py
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from app.errors import DomainError
from app.models.symbolic import Word, WindowState, cylinder_indicator
from app.utils.parsing import parse_function_spec


@dataclass(frozen=True, slots=True)
class IndicatorFunction:
    """
    Тестовая функция — индикатор {x = α} ∩ [y₁...yₖ].
    x = None — без условия на x; пустое слово — всё Ω (константа 1 при x = None).
    """

    function_id: str
    x: Optional[int] = None
    word: Word = field(default_factory=Word)

    @classmethod
    def parse(cls, spec: str) -> "IndicatorFunction":
        x, symbols = parse_function_spec(spec)
        return cls(function_id=spec.strip().lower(), x=x, word=Word(symbols))

    @property
    def depth(self) -> int:
        return len(self.word)

    def evaluate(self, state: WindowState, x: Optional[int] = None) -> int:
        if self.x is not None:
            if x is None:
                raise DomainError(
                    f"Функция {self.function_id!r} зависит от x, а состояние без x-компоненты"
                )
            if x != self.x:
                return 0
        return cylinder_indicator(self.word, state)
