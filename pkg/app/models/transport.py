# app/models/transport.py
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from app.errors import DomainError
from app.models.enums import CandidateCheck


def _matrix(values: Sequence[Sequence[float]], name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape != (2, 2):
        raise DomainError(f"{name} должна быть матрицей 2x2, получено {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, slots=True)
class CostPair:
    """
    Стоимость c(x, y₁, y₂) при X = {1, 2}, d = 2:
    c1[i][j] = e^{c(1,i,j)}, c2[i][j] = e^{c(2,i,j)}; μ = (p, 1 - p).
    """

    c1: np.ndarray
    c2: np.ndarray
    p: float

    def __post_init__(self) -> None:
        c1, c2 = _matrix(self.c1, "C1"), _matrix(self.c2, "C2")
        if not (np.all(np.isfinite(c1)) and np.all(np.isfinite(c2))):
            raise DomainError("Матрицы стоимости содержат inf/nan")
        if np.any(c1 <= 0) or np.any(c2 <= 0):
            raise DomainError("Все 8 элементов C1, C2 должны быть строго положительны")
        if not 0.0 < float(self.p) < 1.0:
            raise DomainError(f"p должно лежать в (0, 1), получено {self.p}")
        object.__setattr__(self, "c1", c1)
        object.__setattr__(self, "c2", c2)
        object.__setattr__(self, "p", float(self.p))

    @classmethod
    def from_log(cls, c1: Sequence[Sequence[float]], c2: Sequence[Sequence[float]], p: float) -> "CostPair":
        """Элементы заданы как c(x,i,j) и экспоненцируются при загрузке."""
        return cls(np.exp(np.asarray(c1, dtype=float)), np.exp(np.asarray(c2, dtype=float)), p)

    @property
    def mu(self) -> Tuple[float, float]:
        return self.p, 1.0 - self.p

    @property
    def stacked(self) -> np.ndarray:
        """Массив формы (x, i, j)."""
        return np.stack([self.c1, self.c2])

    @property
    def log_costs(self) -> np.ndarray:
        return np.log(self.stacked)

    def shifted(self, t1: float, t2: float) -> "CostPair":
        """c(x,·,·) + t_x."""
        return CostPair(self.c1 * np.exp(t1), self.c2 * np.exp(t2), self.p)


@dataclass(frozen=True, slots=True)
class ConicCoefficients:
    """
    Коэффициенты конического сечения g(z₁,z₂) = qA z₁² + qB z₂² + qC z₁z₂ + qD z₁ + qE z₂ + 1.
    """

    q_a: float
    q_b: float
    q_c: float
    q_d: float
    q_e: float

    def g(self, z1: float, z2: float) -> float:
        return self.q_a * z1**2 + self.q_b * z2**2 + self.q_c * z1 * z2 + self.q_d * z1 + self.q_e * z2 + 1.0

    def lagrange(self, z1: float, z2: float, p: float) -> float:
        """Вторая коника: условие Лагранжа для минимума -p log z₁ - (1-p) log z₂ на g = 0."""
        return (
            2 * self.q_b * p * z2**2
            - 2 * self.q_a * (1 - p) * z1**2
            + self.q_c * (2 * p - 1) * z1 * z2
            + self.q_e * p * z2
            - self.q_d * (1 - p) * z1
        )

    def jacobian(self, z1: float, z2: float, p: float) -> np.ndarray:
        return np.array(
            [
                [2 * self.q_a * z1 + self.q_c * z2 + self.q_d, 2 * self.q_b * z2 + self.q_c * z1 + self.q_e],
                [
                    -4 * self.q_a * (1 - p) * z1 + self.q_c * (2 * p - 1) * z2 - self.q_d * (1 - p),
                    4 * self.q_b * p * z2 + self.q_c * (2 * p - 1) * z1 + self.q_e * p,
                ],
            ]
        )

    def g_monomials(self) -> np.ndarray:
        """K[i, j] — коэффициент при z₁^i z₂^j."""
        K = np.zeros((3, 3))
        K[0, 0], K[1, 0], K[0, 1] = 1.0, self.q_d, self.q_e
        K[2, 0], K[0, 2], K[1, 1] = self.q_a, self.q_b, self.q_c
        return K

    def lagrange_monomials(self, p: float) -> np.ndarray:
        K = np.zeros((3, 3))
        K[1, 0] = -self.q_d * (1 - p)
        K[0, 1] = self.q_e * p
        K[2, 0] = -2 * self.q_a * (1 - p)
        K[0, 2] = 2 * self.q_b * p
        K[1, 1] = self.q_c * (2 * p - 1)
        return K


@dataclass(frozen=True, slots=True)
class ConicCandidate:
    """
    Точка пересечения двух коник с результатами проверок кандидата.
    """

    z1: float
    z2: float
    conic_residual: float
    subdominant: float
    objective: Optional[float]
    failed: Tuple[CandidateCheck, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.failed


@dataclass(frozen=True, slots=True)
class DualSolution:
    """
    Минимизатор φ̃ = (-log z₁, -log z₂) двойственной задачи Фенхеля-Рокафеллара.
    """

    z1: float
    z2: float
    p: float
    conic_residual: float
    subdominant: float
    candidates: Tuple[ConicCandidate, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.z1 <= 0 or self.z2 <= 0:
            raise DomainError(f"Решение должно быть положительным: z=({self.z1}, {self.z2})")

    @property
    def phi1(self) -> float:
        return float(-np.log(self.z1))

    @property
    def phi2(self) -> float:
        return float(-np.log(self.z2))

    @property
    def z(self) -> Tuple[float, float]:
        return self.z1, self.z2

    @property
    def objective(self) -> float:
        """p·φ̃₁ + (1-p)·φ̃₂."""
        return self.p * self.phi1 + (1 - self.p) * self.phi2


@dataclass(frozen=True, slots=True)
class PlanKernel:
    """
    Нормированное ядро плана: cbar[x, i, j] = C̄^x_{ij} = e^{Ā(x, i j...)}.
    Для каждого столбца j: Σ_{x,i} C̄^x_{ij} = 1.
    """

    cbar: np.ndarray
    h: Optional[np.ndarray] = None
    b_matrix: Optional[np.ndarray] = None
    origin: Optional[DualSolution] = None

    def __post_init__(self) -> None:
        cbar = np.array(self.cbar, dtype=float)
        if cbar.ndim != 3 or cbar.shape[1] != cbar.shape[2]:
            raise DomainError(f"Ядро плана должно иметь форму (|X|, d, d), получено {cbar.shape}")
        if np.any(cbar <= 0) or not np.all(np.isfinite(cbar)):
            raise DomainError("Элементы ядра плана должны быть конечными и строго положительными")
        cbar.setflags(write=False)
        object.__setattr__(self, "cbar", cbar)

    @classmethod
    def from_matrices(cls, *matrices: Sequence[Sequence[float]]) -> "PlanKernel":
        return cls(np.stack([np.asarray(m, dtype=float) for m in matrices]))

    @property
    def x_values(self) -> Tuple[int, ...]:
        return tuple(range(1, self.cbar.shape[0] + 1))

    @property
    def d(self) -> int:
        return self.cbar.shape[1]

    @property
    def column_sums(self) -> np.ndarray:
        return self.cbar.sum(axis=(0, 1))

    @property
    def normalization_deviation(self) -> float:
        return float(np.max(np.abs(self.column_sums - 1.0)))
