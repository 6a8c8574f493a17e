# app/models/chain.py
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from app.errors import DomainError
from app.models.symbolic import Alphabet, WindowState, Word

# Метка ветви: символ i (классическая цепь) или пара (α, i) (цепь плана)
BranchLabel = Union[int, Tuple[int, int]]
# Состояние конечной цепи: (x или None, слово окна)
StateLabel = Tuple[Optional[int], Word]


@dataclass(frozen=True, slots=True)
class ChainSpec:
    """
    Цепь Элтона на X × окне (или только на окне) в табличном виде.

    Номер состояния s = pos(x)·d^W + index(окно); для каждой ветви b
    next_state[s, b] — образ τ_b(s), weights[s, b] — вероятность p_b(s).
    Порядок ветвей: x по возрастанию, затем i по возрастанию.
    """

    alphabet: Alphabet
    window: int
    x_values: Optional[Tuple[int, ...]]
    branches: Tuple[BranchLabel, ...]
    next_state: np.ndarray
    weights: np.ndarray
    initial_state: int
    seed: int
    steps: int
    burn_in: int = 0
    debug_weights: bool = False

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise DomainError(f"Число шагов N должно быть >= 1, получено {self.steps}")
        if self.burn_in < 0:
            raise DomainError(f"burn_in должен быть >= 0, получено {self.burn_in}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed должен быть 64-битным неотрицательным целым: {self.seed}")
        if not 0 <= self.initial_state < self.n_states:
            raise DomainError(f"Начальное состояние {self.initial_state} вне диапазона")

    @property
    def n_states(self) -> int:
        groups = len(self.x_values) if self.x_values else 1
        return groups * self.alphabet.d ** self.window

    @property
    def is_plan(self) -> bool:
        return self.x_values is not None

    def state_of(self, index: int) -> Tuple[Optional[int], WindowState]:
        group, word_index = divmod(index, self.alphabet.d ** self.window)
        x = self.x_values[group] if self.x_values else None
        word = self.alphabet.word_at(word_index, self.window)
        return x, WindowState.from_word(self.alphabet, word)


@dataclass(frozen=True, slots=True)
class Estimate:
    """
    Оценка Биркгофа (1/N) Σ f(z_k) с доверительным интервалом 95% по батчам.

    Сырые суммы (total, batch_*) позволяют сливать оценки независимых цепей
    ассоциативно; batch_variance — оценка асимптотической дисперсии b·Var(батч-средних).
    """

    function_id: str
    mean: float
    count: int
    batch_variance: float
    ci_halfwidth: float
    seed: Optional[int]
    total: float
    batch_count: int
    batch_size: int
    batch_sum: float
    batch_sumsq: float

    def __post_init__(self) -> None:
        if self.count <= 0:
            raise DomainError("Оценка по пустой траектории")
        if self.ci_halfwidth < 0 or self.batch_variance < 0:
            raise DomainError("Дисперсия и полуширина интервала должны быть >= 0")


@dataclass(frozen=True, slots=True)
class FiniteChain:
    """
    Конечная цепь Маркова. transition[to, from] — столбцово-стохастическая матрица.
    """

    alphabet: Alphabet
    window: int
    states: Tuple[StateLabel, ...]
    transition: np.ndarray
    tolerance: float = 1e-10

    def __post_init__(self) -> None:
        P = np.array(self.transition, dtype=float)
        P.setflags(write=False)
        n = len(self.states)
        if P.shape != (n, n):
            raise DomainError(f"Матрица перехода должна быть {n}x{n}, получено {P.shape}")
        if np.any(P < 0):
            raise DomainError("Матрица перехода содержит отрицательные элементы")
        deviation = float(np.max(np.abs(P.sum(axis=0) - 1.0)))
        if deviation > self.tolerance:
            raise DomainError(f"Столбцы матрицы перехода не суммируются в 1: отклонение {deviation:.3e}")
        object.__setattr__(self, "transition", P)

    @property
    def is_plan(self) -> bool:
        return any(x is not None for x, _ in self.states)


@dataclass(frozen=True, slots=True)
class StationaryDistribution:
    """π с Pπ = π; residual = ‖Pπ - π‖∞."""

    chain: FiniteChain
    probabilities: np.ndarray
    residual: float

    def __post_init__(self) -> None:
        probs = np.array(self.probabilities, dtype=float)
        probs.setflags(write=False)
        object.__setattr__(self, "probabilities", probs)

    @property
    def states(self) -> Tuple[StateLabel, ...]:
        return self.chain.states

    def check_probability(self, tol: float = 1e-9) -> None:
        probs = self.probabilities
        if probs.shape != (len(self.states),) or np.any(probs < -tol) or abs(probs.sum() - 1.0) > tol:
            raise DomainError("Распределение не является вероятностным вектором")
