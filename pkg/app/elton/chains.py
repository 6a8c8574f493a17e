# app/elton/chains.py
"""
Построение цепей Элтона в табличном виде: классический сэмплер меры Гиббса
(ветви — символы i) и сэмплер плана (ветви — пары (α, i)).
"""
from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from app.config import DEFAULT_TOLERANCES, Tolerances
from app.errors import DomainError
from app.models.chain import ChainSpec
from app.models.potential import LocallyConstantPotential
from app.models.symbolic import Alphabet, WindowState, Word
from app.models.transport import PlanKernel
from app.thermo.transfer import column_sum_deviation

log = logging.getLogger(__name__)


def _check_weights(weights: np.ndarray, tolerances: Tolerances, what: str) -> None:
    if np.any(weights <= 0):
        raise DomainError(f"{what}: веса ветвей должны быть строго положительны")
    deviation = float(np.max(np.abs(weights.sum(axis=1) - 1.0)))
    if deviation > tolerances.chain_weight_tol:
        raise DomainError(f"{what}: сумма весов ветвей отличается от 1 на {deviation:.3e}")


def classical_chain(
    normalized: LocallyConstantPotential,
    z0: WindowState,
    seed: int,
    steps: int,
    burn_in: int = 0,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    debug_weights: bool = False,
) -> ChainSpec:
    """
    z_{k+1} = i·z_k с вероятностью e^{Ā(i·z_k)}. Окно цепи — длина z0.
    """
    deviation = column_sum_deviation(normalized)
    if deviation > tolerances.chain_weight_tol:
        raise DomainError(
            f"Потенциал не нормирован: max|Σ_i e^Ā(i·w) - 1| = {deviation:.3e}"
        )
    alphabet = normalized.alphabet
    if z0.alphabet != alphabet:
        raise DomainError("Начальное состояние задано над другим алфавитом")
    window = z0.length
    if window < max(normalized.depth - 1, 1):
        raise DomainError(
            f"Окно {window} короче необходимого {normalized.depth - 1} для потенциала глубины {normalized.depth}"
        )

    d = alphabet.d
    n_states = d ** window
    tail = d ** (window - 1)
    next_state = np.empty((n_states, d), dtype=np.int64)
    weights = np.empty((n_states, d))
    for s in range(n_states):
        word = alphabet.word_at(s, window).symbols
        for i in alphabet.symbols:
            next_state[s, i - 1] = (i - 1) * tail + s // d
            weights[s, i - 1] = np.exp(normalized.value((i,) + word))
    _check_weights(weights, tolerances, "Классическая цепь")

    log.debug("Классическая цепь: окно %d, состояний %d, seed=%d", window, n_states, seed)
    return ChainSpec(
        alphabet=alphabet,
        window=window,
        x_values=None,
        branches=tuple(alphabet.symbols),
        next_state=next_state,
        weights=weights,
        initial_state=alphabet.index(z0.buffer),
        seed=seed,
        steps=steps,
        burn_in=burn_in,
        debug_weights=debug_weights,
    )


def plan_chain(
    kernel: PlanKernel,
    x0: int,
    y0: WindowState,
    seed: int,
    steps: int,
    burn_in: int = 0,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    debug_weights: bool = False,
) -> ChainSpec:
    """
    (x, y) -> (α, i·y) с вероятностью C̄^α_{i, y₁}; x текущего состояния
    на переход не влияет. Ветви упорядочены по α, затем по i.
    """
    deviation = kernel.normalization_deviation
    if deviation > tolerances.chain_weight_tol:
        raise DomainError(f"Ядро плана не нормировано: max|Σ_x,i C̄ - 1| = {deviation:.3e}")
    alphabet = Alphabet(kernel.d)
    if y0.alphabet != alphabet:
        raise DomainError("Начальное состояние задано над другим алфавитом")
    x_values = kernel.x_values
    if x0 not in x_values:
        raise DomainError(f"x0={x0} вне множества X = {list(x_values)}")

    d, window = alphabet.d, y0.length
    words = d ** window
    tail = d ** (window - 1)
    n_states = len(x_values) * words
    branches = tuple((alpha, i) for alpha in x_values for i in alphabet.symbols)

    next_state = np.empty((n_states, len(branches)), dtype=np.int64)
    weights = np.empty((n_states, len(branches)))
    for s in range(n_states):
        w = s % words
        first = w // tail
        for b, (alpha, i) in enumerate(branches):
            next_state[s, b] = (alpha - 1) * words + (i - 1) * tail + w // d
            weights[s, b] = kernel.cbar[alpha - 1, i - 1, first]
    _check_weights(weights, tolerances, "Цепь плана")

    initial = x_values.index(x0) * words + alphabet.index(y0.buffer)
    log.debug("Цепь плана: окно %d, состояний %d, seed=%d", window, n_states, seed)
    return ChainSpec(
        alphabet=alphabet,
        window=window,
        x_values=x_values,
        branches=branches,
        next_state=next_state,
        weights=weights,
        initial_state=initial,
        seed=seed,
        steps=steps,
        burn_in=burn_in,
        debug_weights=debug_weights,
    )


def initial_window(alphabet: Alphabet, window: int, word: Optional[str] = None) -> WindowState:
    """Начальное окно: из слова конфига или 11...1; длина слова должна совпадать с окном."""
    if not word:
        return WindowState.filled(alphabet, window)
    state = WindowState.from_word(alphabet, alphabet.check_word(Word.parse(word)))
    if state.length != window:
        raise DomainError(f"Начальное слово {word!r} имеет длину {state.length}, окно цепи {window}")
    return state