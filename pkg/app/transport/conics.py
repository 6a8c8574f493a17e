# app/transport/conics.py
"""
Пересечение двух коник: g(z₁,z₂) = 0 и условие Лагранжа.

Одна переменная исключается результантом Сильвестра (многочлен степени <= 4),
вещественные корни ищутся через собственные числа матрицы-компаньона
(numpy.polynomial), затем обратная подстановка и полировка 2-D методом Ньютона.
"""
from __future__ import annotations

import logging
from typing import List, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from app.config import DEFAULT_TOLERANCES, Tolerances
from app.errors import DomainError, NumericalError
from app.models.transport import ConicCoefficients, CostPair

log = logging.getLogger(__name__)

# корень считается вещественным, если мнимая часть мала; точность добирает Ньютон
_IMAG_TOL = 1e-6
_ZERO_TOL = 1e-13


def _det2(m: np.ndarray) -> float:
    # явная формула: у стохастических матриц с равными столбцами даёт ровно 0
    return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


def coefficients_from_matrices(c1: np.ndarray, c2: np.ndarray) -> ConicCoefficients:
    """
    qA = det C¹, qB = det C², qC = det C¹² + det C²¹, qD = -tr C¹, qE = -tr C².
    C¹² — первая строка C¹ и вторая строка C², C²¹ — наоборот.
    """
    c1, c2 = np.asarray(c1, dtype=float), np.asarray(c2, dtype=float)
    if c1.shape != (2, 2) or c2.shape != (2, 2):
        raise DomainError(f"Ожидались матрицы 2x2, получено {c1.shape} и {c2.shape}")
    return ConicCoefficients(
        q_a=_det2(c1),
        q_b=_det2(c2),
        q_c=_det2(np.array([c1[0], c2[1]])) + _det2(np.array([c2[0], c1[1]])),
        q_d=float(-np.trace(c1)),
        q_e=float(-np.trace(c2)),
    )


def conic_coefficients(costs: CostPair) -> ConicCoefficients:
    return coefficients_from_matrices(costs.c1, costs.c2)


def _coefficient_polys(K: np.ndarray, scale: float) -> List[Polynomial]:
    """
    Коника K[i, j] z₁^i z₂^j как многочлен по z₁ с коэффициентами-многочленами от z₂.
    Старшие нулевые коэффициенты отбрасываются (реальная степень по z₁).
    """
    polys = [Polynomial(K[i, :]) for i in range(K.shape[0])]
    while polys and np.all(np.abs(polys[-1].coef) <= _ZERO_TOL * scale):
        polys.pop()
    return polys


def _poly_det(matrix: Sequence[Sequence[Polynomial]]) -> Polynomial:
    """Детерминант матрицы многочленов разложением по первой строке (размер <= 4)."""
    n = len(matrix)
    if n == 0:
        return Polynomial([1.0])
    if n == 1:
        return matrix[0][0]
    total = Polynomial([0.0])
    for col in range(n):
        minor = [row[:col] + row[col + 1 :] for row in matrix[1:]]
        term = matrix[0][col] * _poly_det(minor)
        total = total + term if col % 2 == 0 else total - term
    return total


def sylvester_resultant(f: List[Polynomial], g: List[Polynomial]) -> Polynomial:
    """
    Res_{z₁}(f, g) для f = Σ f[k] z₁^k, g = Σ g[k] z₁^k.
    """
    m, n = len(f) - 1, len(g) - 1
    zero = Polynomial([0.0])
    size = m + n
    rows: List[List[Polynomial]] = []
    for shift in range(n):
        row = [zero] * size
        for k, coef in enumerate(reversed(f)):
            row[shift + k] = coef
        rows.append(row)
    for shift in range(m):
        row = [zero] * size
        for k, coef in enumerate(reversed(g)):
            row[shift + k] = coef
        rows.append(row)
    return _poly_det(rows)


def _real_roots(poly: Polynomial, scale: float) -> List[float]:
    coef = np.array(poly.coef, dtype=float)
    if coef.size == 0:
        return []
    top = np.max(np.abs(coef))
    if top == 0:
        return []
    nonzero = np.nonzero(np.abs(coef) > _ZERO_TOL * max(top, scale))[0]
    if nonzero.size == 0:
        return []
    coef = coef[: nonzero[-1] + 1]
    if coef.size == 1:
        return []
    roots = np.polynomial.polynomial.polyroots(coef)
    return [float(r.real) for r in roots if abs(r.imag) <= _IMAG_TOL * max(1.0, abs(r))]


def _eval_in_z1(polys: List[Polynomial], z2: float) -> Polynomial:
    return Polynomial([float(p(z2)) for p in polys]) if polys else Polynomial([0.0])


def _intersections_eliminating_first(K_f: np.ndarray, K_g: np.ndarray) -> List[Tuple[float, float]] | None:
    """
    Исключает z₁; возвращает точки (z₁, z₂) или None, если результант тождественно ноль.
    """
    scale = max(float(np.max(np.abs(K_f))), float(np.max(np.abs(K_g))), 1.0)
    f = _coefficient_polys(K_f, scale)
    g = _coefficient_polys(K_g, scale)
    if len(f) <= 1 and len(g) <= 1:
        # обе коники не зависят от z₁: вырожденный случай
        return None

    resultant = sylvester_resultant(f, g)
    res_scale = max(scale ** 4, 1.0)
    if np.all(np.abs(resultant.coef) <= 1e-11 * res_scale):
        return None

    points: List[Tuple[float, float]] = []
    for z2 in _real_roots(resultant, 0.0):
        f_z1 = _eval_in_z1(f, z2)
        g_z1 = _eval_in_z1(g, z2)
        local = max(np.max(np.abs(f_z1.coef)), np.max(np.abs(g_z1.coef)), 1.0)
        z1_values = _real_roots(f_z1, local) + _real_roots(g_z1, local)
        for z1 in z1_values:
            if abs(f_z1(z1)) + abs(g_z1(z1)) <= 1e-5 * local * max(1.0, abs(z1)) ** 2:
                points.append((z1, z2))
    return points


def _newton_polish(
    coeffs: ConicCoefficients, p: float, z1: float, z2: float, tolerances: Tolerances
) -> Tuple[float, float, float]:
    """Полировка 2-D Ньютоном на (g, Лагранж). Возвращает (z₁, z₂, невязка)."""
    z = np.array([z1, z2], dtype=float)

    def residual_of(point: np.ndarray) -> Tuple[np.ndarray, float]:
        F = np.array([coeffs.g(*point), coeffs.lagrange(*point, p)])
        return F, float(np.max(np.abs(F)))

    F, residual = residual_of(z)
    for _ in range(tolerances.newton_max_iter):
        if residual <= tolerances.newton_tol:
            break
        J = coeffs.jacobian(z[0], z[1], p)
        try:
            step = np.linalg.solve(J, F)
        except np.linalg.LinAlgError:
            # вырожденный якобиан (касание коник): оставляем текущую точку
            break
        candidate = z - step
        F_new, res_new = residual_of(candidate)
        if not np.all(np.isfinite(candidate)) or res_new > residual:
            break
        z, F, residual = candidate, F_new, res_new
    return float(z[0]), float(z[1]), residual


def _dedupe(points: List[Tuple[float, float, float]]) -> List[Tuple[float, float, float]]:
    unique: List[Tuple[float, float, float]] = []
    for z1, z2, res in sorted(points):
        for k, (u1, u2, ures) in enumerate(unique):
            if abs(z1 - u1) <= 1e-8 * (1 + abs(u1)) and abs(z2 - u2) <= 1e-8 * (1 + abs(u2)):
                if res < ures:
                    unique[k] = (z1, z2, res)
                break
        else:
            unique.append((z1, z2, res))
    return unique


def conic_intersections(
    coeffs: ConicCoefficients, p: float, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> List[Tuple[float, float, float]]:
    """
    Все вещественные точки пересечения g = 0 и коники Лагранжа (не более четырёх)
    после полировки Ньютоном: список (z₁, z₂, невязка).
    """
    K_g = coeffs.g_monomials()
    K_l = coeffs.lagrange_monomials(p)

    raw = _intersections_eliminating_first(K_g, K_l)
    if raw is None:
        log.debug("Результант по z1 вырожден, исключаем z2")
        swapped = _intersections_eliminating_first(K_g.T, K_l.T)
        if swapped is None:
            raise NumericalError("Коники имеют общую компоненту: пересечение не конечно")
        raw = [(z1, z2) for z2, z1 in swapped]

    polished = [_newton_polish(coeffs, p, z1, z2, tolerances) for z1, z2 in raw]
    points = _dedupe(polished)
    log.debug("Найдено %d точек пересечения коник (до фильтра)", len(points))
    return points
