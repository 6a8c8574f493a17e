# app/models/symbolic.py
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator, Tuple

from app.errors import DomainError
from app.utils.parsing import parse_word
from app.utils.text import format_word


@dataclass(frozen=True, slots=True)
class Alphabet:
    """
    Алфавит {1, ..., d} пространства Бернулли Ω = {1..d}^ℕ.
    """

    d: int

    def __post_init__(self) -> None:
        if self.d < 2:
            raise DomainError(f"Размер алфавита должен быть >= 2, получено d={self.d}")

    @property
    def symbols(self) -> range:
        return range(1, self.d + 1)

    def check_symbol(self, symbol: int) -> int:
        if not 1 <= symbol <= self.d:
            raise DomainError(f"Символ {symbol} вне алфавита 1..{self.d}")
        return symbol

    def check_word(self, word: "Word") -> "Word":
        for s in word.symbols:
            self.check_symbol(s)
        return word

    def words(self, length: int) -> Iterator["Word"]:
        """Все слова длины length в лексикографическом порядке."""
        for symbols in product(self.symbols, repeat=length):
            yield Word(symbols)

    def index(self, symbols: Tuple[int, ...]) -> int:
        """Номер слова в лексикографическом порядке (первый символ — старший разряд)."""
        idx = 0
        for s in symbols:
            idx = idx * self.d + (s - 1)
        return idx

    def word_at(self, index: int, length: int) -> "Word":
        symbols = []
        for _ in range(length):
            index, r = divmod(index, self.d)
            symbols.append(r + 1)
        return Word(tuple(reversed(symbols)))


@dataclass(frozen=True, slots=True)
class Word:
    """
    Конечное слово y₁...yₙ — координаты цилиндра [y₁...yₙ].
    """

    symbols: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))
        if any(s < 1 for s in self.symbols):
            raise DomainError(f"Символы слова должны быть >= 1: {self.symbols}")

    @classmethod
    def parse(cls, text: str) -> "Word":
        return cls(parse_word(text))

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return format_word(self.symbols)


@dataclass(frozen=True, slots=True)
class WindowState:
    """
    Конечный суррогат точки Ω: последние w символов, buffer[0] — первая координата.
    Точен, пока глубина всех потенциалов и тестовых функций не превышает w.
    """

    alphabet: Alphabet
    buffer: Tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "buffer", tuple(int(s) for s in self.buffer))
        if not self.buffer:
            raise DomainError("Длина окна должна быть >= 1")
        for s in self.buffer:
            self.alphabet.check_symbol(s)

    @classmethod
    def filled(cls, alphabet: Alphabet, length: int, symbol: int = 1) -> "WindowState":
        return cls(alphabet, (symbol,) * length)

    @classmethod
    def from_word(cls, alphabet: Alphabet, word: Word) -> "WindowState":
        return cls(alphabet, word.symbols)

    @property
    def length(self) -> int:
        return len(self.buffer)

    @property
    def first(self) -> int:
        return self.buffer[0]

    def prefix(self, k: int) -> Tuple[int, ...]:
        if k > self.length:
            raise DomainError(
                f"Нужно {k} символов, а окно хранит только {self.length}"
            )
        return self.buffer[:k]

    def __str__(self) -> str:
        return format_word(self.buffer)


def prepend(state: WindowState, i: int) -> WindowState:
    """τ_i(z) = iz: сдвиг вправо, i встаёт в начало, длина окна сохраняется."""
    state.alphabet.check_symbol(i)
    return WindowState(state.alphabet, ((i,) + state.buffer)[: state.length])


def cylinder_indicator(word: Word, state: WindowState) -> int:
    """1, если первые |word| символов состояния совпадают со словом."""
    if len(word) > state.length:
        raise DomainError(
            f"Слово длины {len(word)} длиннее окна {state.length}: информации недостаточно"
        )
    return int(state.buffer[: len(word)] == word.symbols)


def window_length(potential_depth: int, function_depths: Iterable[int] = ()) -> int:
    """Длина окна запуска: max(глубина потенциала - 1, глубина самой глубокой функции), минимум 1."""
    return max(potential_depth - 1, max(function_depths, default=0), 1)
