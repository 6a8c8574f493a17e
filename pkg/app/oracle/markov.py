# app/oracle/markov.py
"""
Точная «эталонная» сторона: конечные цепи Маркова, индуцированные нормированным
потенциалом или ядром плана, их стационарные распределения и точные интегралы
индикаторов цилиндров. Цепи строятся прямым перебором слов, независимо
от таблиц сэмплера.
"""
from __future__ import annotations

import logging
from typing import Dict, List, Tuple

import numpy as np

from app.config import DEFAULT_TOLERANCES, Tolerances
from app.errors import DomainError, InconsistencyError, NumericalError, StructuralError
from app.models.chain import FiniteChain, StateLabel, StationaryDistribution
from app.models.functions import IndicatorFunction
from app.models.potential import LocallyConstantPotential
from app.models.symbolic import Alphabet, WindowState, Word
from app.models.transport import PlanKernel

log = logging.getLogger(__name__)


def _index_states(states: List[StateLabel]) -> Dict[StateLabel, int]:
    return {state: k for k, state in enumerate(states)}


def classical_finite_chain(
    potential: LocallyConstantPotential, window: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> FiniteChain:
    """
    Цепь на словах длины window: из w в (i·w)[:window] с вероятностью e^{Ā(i·w)}.
    """
    if window < max(potential.depth - 1, 1):
        raise DomainError(
            f"Окно {window} короче необходимого {max(potential.depth - 1, 1)} для потенциала глубины {potential.depth}"
        )
    alphabet = potential.alphabet
    states: List[StateLabel] = [(None, w) for w in alphabet.words(window)]
    index = _index_states(states)

    P = np.zeros((len(states), len(states)))
    for col, (_, word) in enumerate(states):
        for i in alphabet.symbols:
            extended = (i,) + word.symbols
            target = (None, Word(extended[:window]))
            P[index[target], col] += np.exp(potential.value(extended))
    return FiniteChain(alphabet, window, tuple(states), P, tolerance=tolerances.normalization_tol)


def plan_finite_chain(
    kernel: PlanKernel, window: int, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> FiniteChain:
    """
    Цепь на X × словах длины window: из (x, w) в (α, (i·w)[:window])
    с вероятностью C̄^α_{i, w₁}; x предыдущего состояния на переход не влияет.
    """
    if window < 1:
        raise DomainError("Окно цепи плана должно быть >= 1")
    alphabet = Alphabet(kernel.d)
    states: List[StateLabel] = [(x, w) for x in kernel.x_values for w in alphabet.words(window)]
    index = _index_states(states)

    P = np.zeros((len(states), len(states)))
    for col, (_, word) in enumerate(states):
        first = word.symbols[0]
        for alpha in kernel.x_values:
            for i in alphabet.symbols:
                target = (alpha, Word(((i,) + word.symbols)[:window]))
                P[index[target], col] += kernel.cbar[alpha - 1, i - 1, first - 1]
    return FiniteChain(alphabet, window, tuple(states), P, tolerance=tolerances.kernel_tol)


def _power_stationary(P: np.ndarray, tolerances: Tolerances) -> np.ndarray:
    n = P.shape[0]
    pi = np.full(n, 1.0 / n)
    target = 0.1 * tolerances.stationary_tol
    for _ in range(tolerances.eigen_max_iter):
        nxt = P @ pi
        if np.max(np.abs(nxt - pi)) <= target:
            return nxt
        pi = nxt
    raise StructuralError(
        "Степенной метод для стационарного распределения не сошёлся: цепь периодична?",
        residual=float(np.max(np.abs(P @ pi - pi))),
    )


def stationary(chain: FiniteChain, tolerances: Tolerances = DEFAULT_TOLERANCES) -> StationaryDistribution:
    """
    π с Pπ = π: прямое решение (P - I)π = 0, Σπ = 1; перекрёстная проверка
    степенным методом.
    """
    P = chain.transition
    n = P.shape[0]
    A = P - np.eye(n)

    # порог ранга от допусков: столбцы нормированной цепи суммируются в 1 лишь до ~1e-14
    singular = np.linalg.svd(A, compute_uv=False)
    rank_tol = max(1.0, float(singular[0])) * tolerances.stationary_crosscheck_tol
    kernel_dim = int(np.sum(singular <= rank_tol))
    if kernel_dim != 1:
        raise StructuralError(
            f"Ядро (P - I) имеет размерность {kernel_dim}: цепь приводима, стационарное распределение не единственно"
        )

    # одно уравнение (P - I)π = 0 избыточно: заменяем его нормировкой
    system = A.copy()
    system[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    pi = np.linalg.solve(system, rhs)

    residual = float(np.max(np.abs(P @ pi - pi)))
    if residual > tolerances.stationary_tol:
        raise NumericalError(f"Невязка стационарного распределения {residual:.3e}", residual=residual)

    crosscheck = _power_stationary(P, tolerances)
    gap = float(np.max(np.abs(crosscheck - pi)))
    if gap > tolerances.stationary_crosscheck_tol:
        raise InconsistencyError(
            f"Прямое решение и степенной метод расходятся на {gap:.3e}", residual=gap
        )

    log.debug("Стационарное распределение: %d состояний, невязка %.3e, расхождение %.3e", n, residual, gap)
    return StationaryDistribution(chain=chain, probabilities=pi, residual=residual)


def exact_integral(dist: StationaryDistribution, f: IndicatorFunction) -> float:
    """Σ_states f(state)·π(state)."""
    chain = dist.chain
    if f.depth > chain.window:
        raise DomainError(f"Глубина функции {f.depth} больше окна цепи {chain.window}")
    if f.x is not None and not chain.is_plan:
        raise DomainError(f"Функция {f.function_id!r} зависит от x, а цепь классическая")
    total = 0.0
    for (x, word), prob in zip(chain.states, dist.probabilities):
        total += f.evaluate(WindowState.from_word(chain.alphabet, word), x) * prob
    return float(total)


def integrate_table(dist: StationaryDistribution, potential: LocallyConstantPotential) -> float:
    """∫A dμ для таблицы глубины не больше окна."""
    chain = dist.chain
    if potential.depth > chain.window:
        raise DomainError(f"Глубина таблицы {potential.depth} больше окна цепи {chain.window}")
    values = np.array([potential.value(word.symbols) for _, word in chain.states])
    return float(values @ dist.probabilities)


def plan_triple_marginal(dist: StationaryDistribution) -> np.ndarray:
    """ρ[x, i, j] = π(x, y₁ = i, y₂ = j)."""
    chain = dist.chain
    if not chain.is_plan:
        raise DomainError("Маргинал (x, y₁, y₂) определён только для цепи плана")
    if chain.window < 2:
        raise DomainError("Для маргинала (x, y₁, y₂) нужно окно >= 2")
    dist.check_probability()
    x_count = max(x for x, _ in chain.states)
    d = chain.alphabet.d
    rho = np.zeros((x_count, d, d))
    for (x, word), prob in zip(chain.states, dist.probabilities):
        rho[x - 1, word.symbols[0] - 1, word.symbols[1] - 1] += prob
    return rho


def x_marginal(dist: StationaryDistribution) -> np.ndarray:
    chain = dist.chain
    if not chain.is_plan:
        raise DomainError("x-маргинал определён только для цепи плана")
    x_count = max(x for x, _ in chain.states)
    out = np.zeros(x_count)
    for (x, _), prob in zip(chain.states, dist.probabilities):
        out[x - 1] += prob
    return out


def y_pair_marginal(dist: StationaryDistribution) -> np.ndarray:
    """ρ_y[i, j] = π(y₁ = i, y₂ = j) (суммирование по x, если оно есть)."""
    chain = dist.chain
    if chain.window < 2:
        raise DomainError("Для маргинала (y₁, y₂) нужно окно >= 2")
    d = chain.alphabet.d
    out = np.zeros((d, d))
    for (_, word), prob in zip(chain.states, dist.probabilities):
        out[word.symbols[0] - 1, word.symbols[1] - 1] += prob
    return out


def shift_invariance_defect(dist: StationaryDistribution) -> float:
    """max_j |Σ_i ρ(i, j) - Σ_k ρ(j, k)|: σ-инвариантность y-маргинала."""
    rho = y_pair_marginal(dist)
    return float(np.max(np.abs(rho.sum(axis=0) - rho.sum(axis=1))))


def variational_terms(
    potential: LocallyConstantPotential,
    normalized: LocallyConstantPotential,
    dist: StationaryDistribution,
) -> Tuple[float, float]:
    """
    (∫A dμ_A, h(μ_A)) с h(μ_A) = -∫Ā dμ_A; их сумма равна log λ_A.
    """
    return integrate_table(dist, potential), -integrate_table(dist, normalized)
