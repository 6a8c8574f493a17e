# app/transport/dual.py
"""
Минимизатор φ̃ двойственной задачи inf {∫φ dμ : P(c - φ) = 0}.
"""
from __future__ import annotations

import logging
from typing import List, Tuple

import numpy as np

from app.config import DEFAULT_TOLERANCES, Tolerances
from app.errors import DomainError, InconsistencyError, InfeasibleError, NumericalError
from app.models.enums import CandidateCheck
from app.models.transport import ConicCandidate, ConicCoefficients, CostPair, DualSolution
from app.transport.conics import coefficients_from_matrices, conic_coefficients, conic_intersections

log = logging.getLogger(__name__)


def b_matrix(costs: CostPair, z1: float, z2: float) -> np.ndarray:
    """B(z) = z₁C¹ + z₂C²."""
    return z1 * costs.c1 + z2 * costs.c2


def subdominant_eigenvalue(costs: CostPair, z1: float, z2: float) -> float:
    """
    Собственное число B(z), отличное от единичного. На конике g = 0 одно из
    собственных чисел равно 1; возвращается второе.
    """
    eigenvalues = np.linalg.eigvals(b_matrix(costs, z1, z2))
    unit = int(np.argmin(np.abs(eigenvalues - 1.0)))
    return float(np.real(eigenvalues[1 - unit]))


def _objective(p: float, z1: float, z2: float) -> float:
    return float(-p * np.log(z1) - (1 - p) * np.log(z2))


def classify_candidate(
    costs: CostPair, z1: float, z2: float, residual: float, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> ConicCandidate:
    """Проверки: положительность, точка на конике, второе собственное число < 1."""
    failed: List[CandidateCheck] = []
    positive = z1 > 0 and z2 > 0
    if not positive:
        failed.append(CandidateCheck.POSITIVE)
    if residual > tolerances.conic_tol:
        failed.append(CandidateCheck.ON_CONIC)

    other = subdominant_eigenvalue(costs, z1, z2)
    if abs(other - 1.0) <= tolerances.spectral_band:
        failed.append(CandidateCheck.SPECTRAL_AMBIGUOUS)
    elif other >= 1.0 - tolerances.spectral_band:
        failed.append(CandidateCheck.SPECTRAL)

    return ConicCandidate(
        z1=z1,
        z2=z2,
        conic_residual=residual,
        subdominant=other,
        objective=_objective(costs.p, z1, z2) if positive else None,
        failed=tuple(failed),
    )


def describe_candidates(candidates: Tuple[ConicCandidate, ...]) -> str:
    lines = []
    for k, c in enumerate(candidates, start=1):
        verdict = "ok" if c.passed else "нарушены: " + ", ".join(f.value for f in c.failed)
        lines.append(
            f"  #{k}: z=({c.z1:.10g}, {c.z2:.10g}), невязка={c.conic_residual:.2e}, "
            f"λ₂={c.subdominant:.10g} — {verdict}"
        )
    return "\n".join(lines) if lines else "  (пересечений нет)"


def recover_p(
    c1: np.ndarray, c2: np.ndarray, z1: float, z2: float, conic_tol: float = 1e-4
) -> float:
    """
    Обратная задача: по точке z на конике g = 0 восстановить вес p, при котором
    z удовлетворяет условию Лагранжа. Условие линейно по p:
    p = (2qA z₁² + qC z₁z₂ + qD z₁) / (2qA z₁² + 2qB z₂² + 2qC z₁z₂ + qD z₁ + qE z₂).
    Допуск conic_tol рассчитан на точки, напечатанные с 6 значащими цифрами.
    """
    if not (z1 > 0 and z2 > 0):
        raise DomainError(f"Точка z должна быть положительной, получено ({z1}, {z2})")
    coeffs = coefficients_from_matrices(c1, c2)
    residual = abs(coeffs.g(z1, z2))
    if residual > conic_tol:
        raise InconsistencyError(f"Точка z не лежит на конике: |g(z)| = {residual:.3e}", residual=residual)

    numerator = 2 * coeffs.q_a * z1**2 + coeffs.q_c * z1 * z2 + coeffs.q_d * z1
    denominator = (
        2 * coeffs.q_a * z1**2
        + 2 * coeffs.q_b * z2**2
        + 2 * coeffs.q_c * z1 * z2
        + coeffs.q_d * z1
        + coeffs.q_e * z2
    )
    if abs(denominator) <= 1e-12 * max(1.0, abs(numerator)):
        raise InconsistencyError("Условие Лагранжа в точке z не зависит от p: вес не определён")

    p = numerator / denominator
    log.debug("recover_p: z=(%.10g, %.10g), |g|=%.2e, p=%.12g", z1, z2, residual, p)
    if not 0.0 < p < 1.0:
        raise InconsistencyError(f"Восстановленный вес p = {p:.6g} вне (0, 1)")
    return float(p)


def solve_dual(costs: CostPair, tolerances: Tolerances = DEFAULT_TOLERANCES) -> DualSolution:
    """
    Все пересечения g = 0 с коникой Лагранжа, фильтр проверок, затем минимум
    -p log z₁ - (1-p) log z₂ среди выживших. Полный список кандидатов
    сохраняется в DualSolution.candidates.
    """
    coeffs: ConicCoefficients = conic_coefficients(costs)
    log.debug("Коэффициенты коники: %s", coeffs)

    points = conic_intersections(coeffs, costs.p, tolerances)
    candidates = tuple(classify_candidate(costs, z1, z2, res, tolerances) for z1, z2, res in points)
    survivors = sorted((c for c in candidates if c.passed), key=lambda c: c.objective)

    log.info(
        "Двойственная задача: кандидатов=%d, прошли проверки=%d",
        len(candidates),
        len(survivors),
    )
    if not survivors:
        raise InfeasibleError(
            "Ни одна точка пересечения не прошла проверки кандидата:\n"
            + describe_candidates(candidates),
            candidates=candidates,
        )
    if len(survivors) > 1 and survivors[1].objective - survivors[0].objective <= tolerances.tie_tol:
        raise NumericalError(
            "Два кандидата дают одинаковое значение цели — минимизатор должен быть единственным:\n"
            + describe_candidates(tuple(survivors[:2]))
        )

    best = survivors[0]
    log.info("Двойственная задача: z=(%.12g, %.12g), цель=%.12g", best.z1, best.z2, best.objective)
    return DualSolution(
        z1=best.z1,
        z2=best.z2,
        p=costs.p,
        conic_residual=best.conic_residual,
        subdominant=best.subdominant,
        candidates=candidates,
    )


def is_column_stochastic(costs: CostPair, tol: float = DEFAULT_TOLERANCES.stochastic_tol) -> bool:
    sums = np.concatenate([costs.c1.sum(axis=0), costs.c2.sum(axis=0)])
    return bool(np.all(np.abs(sums - 1.0) <= tol))


def solve_dual_stochastic_fast_path(
    costs: CostPair, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> DualSolution:
    """
    Для столбцово-стохастических C¹, C²: z = (p, 1 - p), φ̃ = (-log p, -log(1 - p)),
    значение цели — энтропия Бернулли -p log p - (1-p) log(1-p).
    """
    if not is_column_stochastic(costs, tolerances.stochastic_tol):
        raise DomainError("Быстрый путь применим только к столбцово-стохастическим C1, C2")

    z1, z2 = costs.p, 1.0 - costs.p
    coeffs = conic_coefficients(costs)
    candidate = classify_candidate(
        costs, z1, z2, max(abs(coeffs.g(z1, z2)), abs(coeffs.lagrange(z1, z2, costs.p))), tolerances
    )
    return DualSolution(
        z1=z1,
        z2=z2,
        p=costs.p,
        conic_residual=candidate.conic_residual,
        subdominant=candidate.subdominant,
        candidates=(candidate,),
    )
