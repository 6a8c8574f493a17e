# app/thermo/transfer.py
"""
Операторы Рюэля-Перрона-Фробениуса для локально постоянных потенциалов:
матричное представление, доминирующая собственная пара, нормировка
потенциала и проверка равномерной сходимости L_A^n(u)/λ^n.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from app.config import DEFAULT_TOLERANCES, Tolerances
from app.errors import DomainError, NumericalError
from app.models.potential import Eigenpair, LocallyConstantPotential, TransferMatrix

log = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class NormalizationResult:
    potential: LocallyConstantPotential  # Ā
    matrix: TransferMatrix
    eigenpair: Eigenpair
    residual: float  # max_w |Σ_i e^{Ā(i·w)} - 1|


@dataclass(frozen=True, slots=True)
class TransferIterate:
    """
    Результат transfer_iterate: L_A^n(u)/λ^n на словах длины m-1,
    его предел h·∫u dν_A и история sup-расстояний по шагам 1..n.
    """

    values: np.ndarray
    limit: np.ndarray
    distances: Tuple[float, ...]
    eigenvalue: float
    gibbs_integral: float  # ∫u dμ_A
    monotone: bool

    @property
    def distance(self) -> float:
        return self.distances[-1]


def at_least_depth_two(potential: LocallyConstantPotential) -> LocallyConstantPotential:
    """Потенциалы глубины < 2 дополняются репликацией до глубины 2."""
    return potential if potential.depth >= 2 else potential.lift(2)


def build_transfer_matrix(potential: LocallyConstantPotential) -> TransferMatrix:
    """
    entries[(i·w)[:m-1], w] = e^{A(i·w)}; при m = 2 это B_ij = e^{A(ij)}.
    """
    A = at_least_depth_two(potential)
    d, m = A.alphabet.d, A.depth
    size = d ** (m - 1)

    word_index = np.arange(d ** m)
    entries = np.zeros((size, size))
    # слово i·w: строка — его префикс длины m-1, столбец — хвост w
    np.add.at(entries, (word_index // d, word_index % size), np.exp(A.table))
    log.debug("Матрица переноса %dx%d для потенциала глубины %d", size, size, m)
    return TransferMatrix(A.alphabet, m - 1, entries)


def is_primitive(entries: np.ndarray) -> bool:
    """
    M^k > 0 для некоторого k <= (n-1)² + 1 (граница Виландта).
    Степени считаются на 0/1-шаблоне, поэтому переполнения нет.
    """
    pattern = (np.asarray(entries) > 0).astype(np.int64)
    n = pattern.shape[0]
    reach = pattern
    for _ in range((n - 1) ** 2 + 1):
        if np.all(reach > 0):
            return True
        reach = np.minimum(reach @ pattern, 1)
    return False


def _check_primitive(matrix: TransferMatrix) -> None:
    if not is_primitive(matrix.entries):
        raise DomainError("Матрица переноса не примитивна: теорема Перрона неприменима")


def _power_iterate(
    apply: Callable[[np.ndarray], np.ndarray],
    size: int,
    tolerances: Tolerances,
    side: str,
) -> Tuple[float, np.ndarray, float, int]:
    vec = np.full(size, 1.0 / np.sqrt(size))
    residual = np.inf
    for it in range(1, tolerances.eigen_max_iter + 1):
        image = apply(vec)
        lam = float(image @ vec)  # отношение Рэлея, ‖vec‖₂ = 1
        residual = float(np.max(np.abs(image - lam * vec)) / np.max(np.abs(vec)))
        if residual <= tolerances.eigen_tol:
            log.debug("Степенной метод (%s) сошёлся за %d итераций, невязка %.3e", side, it, residual)
            return lam, vec, residual, it
        vec = image / np.linalg.norm(image)
    raise NumericalError(
        f"Степенной метод ({side}) не сошёлся за {tolerances.eigen_max_iter} итераций, "
        f"невязка {residual:.3e}",
        residual=residual,
    )


def dominant_eigenpair(
    matrix: TransferMatrix, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> Eigenpair:
    """
    Левая собственная пара Перрона: h M = λ h, h > 0, ‖h‖₂ = 1.
    Степенной метод с оценкой λ по отношению Рэлея.
    """
    _check_primitive(matrix)
    M = matrix.entries
    lam, h, residual, iterations = _power_iterate(lambda v: v @ M, matrix.size, tolerances, "left")
    return Eigenpair(eigenvalue=lam, vector=np.abs(h), residual=residual, iterations=iterations)


def eigenmeasure(
    matrix: TransferMatrix, eigenpair: Eigenpair, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> np.ndarray:
    """
    Правый вектор Перрона ν (M ν = λ ν) — собственная мера сопряжённого оператора,
    нормированная условием ⟨h, ν⟩ = 1.
    """
    M = matrix.entries
    _, nu, _, _ = _power_iterate(lambda v: M @ v, matrix.size, tolerances, "right")
    nu = np.abs(nu)
    return nu / float(eigenpair.vector @ nu)


def pressure(potential: LocallyConstantPotential, tolerances: Tolerances = DEFAULT_TOLERANCES) -> float:
    """P(A) = log λ_A."""
    return float(np.log(dominant_eigenpair(build_transfer_matrix(potential), tolerances).eigenvalue))


def column_sum_deviation(potential: LocallyConstantPotential) -> float:
    """max_w |Σ_i e^{A(i·w)} - 1| по словам w длины m-1."""
    A = potential if potential.depth >= 1 else potential.lift(1)
    sums = np.exp(A.table).reshape(A.alphabet.d, -1).sum(axis=0)
    return float(np.max(np.abs(sums - 1.0)))


def normalize_with_diagnostics(
    potential: LocallyConstantPotential, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> NormalizationResult:
    """
    Ā(i·w) = A(i·w) + log h((i·w)[:m-1]) - log h(w) - log λ.
    Для глубины < 2 собственный вектор постоянен и Ā = A - log λ в исходной глубине.
    """
    matrix = build_transfer_matrix(potential)
    pair = dominant_eigenpair(matrix, tolerances)
    log_lambda = np.log(pair.eigenvalue)

    if potential.depth < 2:
        table = potential.table - log_lambda
    else:
        d, size = potential.alphabet.d, matrix.size
        word_index = np.arange(d ** potential.depth)
        log_h = np.log(pair.vector)
        table = potential.table + log_h[word_index // d] - log_h[word_index % size] - log_lambda

    normalized = LocallyConstantPotential(potential.alphabet, potential.depth, table)
    residual = column_sum_deviation(normalized)
    log.info(
        "Нормировка потенциала глубины %d: λ=%.12g, невязка %.3e",
        potential.depth,
        pair.eigenvalue,
        residual,
    )
    if residual > tolerances.normalization_tol:
        raise NumericalError(
            f"Нормировка не достигла точности: max|Σ_i e^Ā - 1| = {residual:.3e}",
            residual=residual,
        )
    return NormalizationResult(normalized, matrix, pair, residual)


def normalize_potential(
    potential: LocallyConstantPotential, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> LocallyConstantPotential:
    return normalize_with_diagnostics(potential, tolerances).potential


def transfer_iterate(
    potential: LocallyConstantPotential,
    u: LocallyConstantPotential,
    n: int,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> TransferIterate:
    """
    L_A^n(u)/λ^n и sup-расстояние до предела h·∫u dν_A (ν — собственная мера,
    ⟨h, ν⟩ = 1). Для нормированного A предел равен константе ∫u dμ_A.
    """
    if n < 1:
        raise DomainError(f"Число итераций должно быть >= 1, получено {n}")
    if u.alphabet != potential.alphabet:
        raise DomainError("Потенциал и функция заданы над разными алфавитами")

    A = at_least_depth_two(potential)
    m, d = A.depth, A.alphabet.d
    if u.depth > m:
        raise DomainError(f"Глубина функции {u.depth} больше глубины потенциала {m}")

    matrix = build_transfer_matrix(A)
    pair = dominant_eigenpair(matrix, tolerances)
    lam, h = pair.eigenvalue, pair.vector
    nu = eigenmeasure(matrix, pair, tolerances)

    size = matrix.size
    word_index = np.arange(d ** m)
    weights = np.exp(A.table)
    u_table = u.lift(m).table

    # первый шаг отдельно: u может зависеть от m символов
    values = np.zeros(size)
    np.add.at(values, word_index % size, weights * u_table)
    values /= lam

    weighted = np.zeros(size)
    np.add.at(weighted, word_index % size, weights * u_table * h[word_index // d])
    gibbs_integral = float(nu @ weighted) / lam

    limit = h * float(nu @ values)
    scale = max(1.0, float(np.max(np.abs(limit))))

    distances = [float(np.max(np.abs(values - limit)))]
    M = matrix.entries
    for _ in range(1, n):
        values = (values @ M) / lam
        distances.append(float(np.max(np.abs(values - limit))))

    # ниже этого уровня расстояние определяется ошибкой h и округлением
    floor = max(tolerances.convergence_floor, 10 * pair.residual / lam) * scale
    monotone = all(
        later <= earlier or later <= floor
        for earlier, later in zip(distances[2:], distances[3:])
    )
    log.debug("transfer_iterate: n=%d, расстояние %.3e, монотонно=%s", n, distances[-1], monotone)
    return TransferIterate(
        values=values,
        limit=limit,
        distances=tuple(distances),
        eigenvalue=lam,
        gibbs_integral=gibbs_integral,
        monotone=monotone,
    )
