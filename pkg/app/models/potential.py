# app/models/potential.py
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, Sequence, Tuple

import numpy as np

from app.errors import DomainError
from app.models.enums import Scale
from app.models.symbolic import Alphabet, Word


def _frozen(values: np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, slots=True)
class LocallyConstantPotential:
    """
    Функция на Ω, зависящая от первых m символов: плотная таблица из d^m значений,
    table[index(w)] = A(w), слова в лексикографическом порядке.

    Тот же тип хранит тестовые функции u для transfer_iterate.
    """

    alphabet: Alphabet
    depth: int
    table: np.ndarray

    def __post_init__(self) -> None:
        if self.depth < 0:
            raise DomainError(f"Глубина потенциала должна быть >= 0, получено {self.depth}")
        table = _frozen(np.ravel(self.table))
        expected = self.alphabet.d ** self.depth
        if table.size != expected:
            raise DomainError(
                f"Таблица глубины {self.depth} должна иметь {expected} значений, получено {table.size}"
            )
        if not np.all(np.isfinite(table)):
            raise DomainError("Таблица потенциала содержит нечисловые значения (inf/nan)")
        object.__setattr__(self, "table", table)

    # --- Конструкторы ---

    @classmethod
    def from_mapping(
        cls, alphabet: Alphabet, mapping: Dict[str, float], scale: Scale = Scale.LOG
    ) -> "LocallyConstantPotential":
        """
        Таблица из словаря 'слово' -> значение. В шкале exp значения — e^{A(w)} > 0.
        """
        if not mapping:
            raise DomainError("Пустая таблица потенциала")
        depths = {len(w) for w in mapping}
        if len(depths) != 1:
            raise DomainError(f"Слова таблицы имеют разную длину: {sorted(depths)}")
        depth = depths.pop()
        table = np.full(alphabet.d ** depth, np.nan)
        for text, value in mapping.items():
            word = alphabet.check_word(Word.parse(text))
            table[alphabet.index(word.symbols)] = value
        missing = [str(w) for w in alphabet.words(depth) if np.isnan(table[alphabet.index(w.symbols)])]
        if missing:
            raise DomainError(f"В таблице не хватает слов: {', '.join(missing)}")
        return cls(alphabet, depth, _to_log(table, scale))

    @classmethod
    def from_exp_matrix(cls, matrix: Sequence[Sequence[float]]) -> "LocallyConstantPotential":
        """Матрица e^{A(ij)} (строка — первый символ i, столбец — второй j), глубина 2."""
        arr = np.asarray(matrix, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DomainError(f"Ожидается квадратная матрица, получено {arr.shape}")
        return cls(Alphabet(arr.shape[0]), 2, _to_log(arr.ravel(), Scale.EXP))

    @classmethod
    def constant(cls, alphabet: Alphabet, value: float = 1.0, depth: int = 0) -> "LocallyConstantPotential":
        return cls(alphabet, depth, np.full(alphabet.d ** depth, float(value)))

    @classmethod
    def cylinder_indicator(cls, alphabet: Alphabet, word: Word) -> "LocallyConstantPotential":
        alphabet.check_word(word)
        table = np.zeros(alphabet.d ** len(word))
        table[alphabet.index(word.symbols)] = 1.0
        return cls(alphabet, len(word), table)

    # --- Доступ ---

    def value(self, symbols: Tuple[int, ...]) -> float:
        """A(w) для слова длины >= depth (лишние символы игнорируются)."""
        if len(symbols) < self.depth:
            raise DomainError(f"Для потенциала глубины {self.depth} нужно слово не короче {self.depth}")
        return float(self.table[self.alphabet.index(tuple(symbols[: self.depth]))])

    def words(self) -> Iterator[Word]:
        return self.alphabet.words(self.depth)

    def as_mapping(self) -> Dict[str, float]:
        return {str(w): float(v) for w, v in zip(self.words(), self.table)}

    def lift(self, depth: int) -> "LocallyConstantPotential":
        """Та же функция в таблице большей глубины (репликация по хвостовым символам)."""
        if depth < self.depth:
            raise DomainError(f"Нельзя понизить глубину {self.depth} до {depth}")
        extra = self.alphabet.d ** (depth - self.depth)
        return LocallyConstantPotential(self.alphabet, depth, np.repeat(self.table, extra))

    def shifted(self, constant: float) -> "LocallyConstantPotential":
        return LocallyConstantPotential(self.alphabet, self.depth, self.table + constant)


def _to_log(values: np.ndarray, scale: Scale) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if scale == Scale.LOG:
        return values
    if np.any(~np.isfinite(values)) or np.any(values <= 0):
        raise DomainError("В шкале exp все значения должны быть конечными и строго положительными")
    return np.log(values)


@dataclass(frozen=True, slots=True)
class TransferMatrix:
    """
    Матричное представление оператора RPF на словах длины m-1.
    entries[v, w]: строка v — префикс после приписывания символа, столбец w — текущий префикс.
    Действие: L(u)(w) = Σ_v u(v) entries[v, w], т.е. функции — вектор-строки (u M).
    """

    alphabet: Alphabet
    word_length: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        entries = _frozen(self.entries)
        size = self.alphabet.d ** self.word_length
        if entries.shape != (size, size):
            raise DomainError(f"Матрица должна быть {size}x{size}, получено {entries.shape}")
        if np.any(entries < 0) or not np.all(np.isfinite(entries)):
            raise DomainError("Элементы матрицы переноса должны быть конечными и неотрицательными")
        object.__setattr__(self, "entries", entries)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def is_positive(self) -> bool:
        return bool(np.all(self.entries > 0))


@dataclass(frozen=True, slots=True)
class Eigenpair:
    """
    Собственная пара Перрона: h M = λ h, h > 0, ‖h‖₂ = 1.
    """

    eigenvalue: float
    vector: np.ndarray
    residual: float
    iterations: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "vector", _frozen(self.vector))
