# app/transport/kernel.py
"""
Ядро плана и функционалы плана: нормировка стоимости через вектор Перрона
B = z₁C¹ + z₂C², ядро C̄ для сэмплера и давление плана ∫c dπ + H(π).
"""
from __future__ import annotations

import logging

import numpy as np

from app.config import DEFAULT_TOLERANCES, Tolerances
from app.errors import InconsistencyError
from app.models.chain import StationaryDistribution
from app.models.potential import LocallyConstantPotential, TransferMatrix
from app.models.symbolic import Alphabet
from app.models.transport import CostPair, DualSolution, PlanKernel
from app.oracle.markov import plan_triple_marginal
from app.thermo.transfer import dominant_eigenpair
from app.transport.dual import b_matrix

log = logging.getLogger(__name__)


def build_plan_kernel(
    costs: CostPair, solution: DualSolution, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> PlanKernel:
    """
    h B = h (левый вектор Перрона, ‖h‖₂ = 1), C̄^x_{ij} = z_x C^x_{ij} h(i)/h(j).
    """
    B = b_matrix(costs, solution.z1, solution.z2)
    pair = dominant_eigenpair(TransferMatrix(Alphabet(2), 1, B), tolerances)
    if abs(pair.eigenvalue - 1.0) > tolerances.perron_unit_tol:
        raise InconsistencyError(
            f"Собственное число Перрона B(z) равно {pair.eigenvalue:.12g}, ожидалось 1: "
            "решение двойственной задачи не согласовано",
            residual=abs(pair.eigenvalue - 1.0),
        )

    h = pair.vector
    z = np.array([solution.z1, solution.z2])
    cbar = z[:, None, None] * costs.stacked * (h[None, :, None] / h[None, None, :])
    kernel = PlanKernel(cbar=cbar, h=h, b_matrix=B, origin=solution)

    deviation = kernel.normalization_deviation
    log.info("Ядро плана: λ(B)=%.12g, h=%s, отклонение нормировки %.3e", pair.eigenvalue, h, deviation)
    if deviation > tolerances.kernel_tol:
        raise InconsistencyError(
            f"Ядро плана не нормировано: max|Σ_x,i C̄ - 1| = {deviation:.3e}", residual=deviation
        )
    return kernel


def cost_marginal_potential(costs: CostPair) -> LocallyConstantPotential:
    """b_c(y₁y₂) = log Σ_x e^{c(x,y₁,y₂)}; log λ для него — давление P(c) без ограничения."""
    return LocallyConstantPotential.from_exp_matrix(costs.c1 + costs.c2)


def normalize_cost(costs: CostPair, tolerances: Tolerances = DEFAULT_TOLERANCES) -> PlanKernel:
    """
    Нормировка стоимости без ограничения на x-маргинал: c̄ = c + log h(y₁) - log h(y₂) - log λ,
    где h — левый вектор Перрона B = C¹ + C², λ — его собственное число (λ = e^{P(c)}).
    Ядро C̄^x_{ij} = C^x_{ij} h(i) / (h(j) λ); y-маргинал его плана — мера Гиббса b_c.
    """
    B = costs.c1 + costs.c2
    pair = dominant_eigenpair(TransferMatrix(Alphabet(2), 1, B), tolerances)
    h, lam = pair.vector, pair.eigenvalue
    cbar = costs.stacked * (h[None, :, None] / h[None, None, :]) / lam
    kernel = PlanKernel(cbar=cbar, h=h, b_matrix=B)

    deviation = kernel.normalization_deviation
    log.info("Нормировка стоимости: P(c)=%.12g, отклонение нормировки %.3e", np.log(lam), deviation)
    if deviation > tolerances.kernel_tol:
        raise InconsistencyError(
            f"Нормированная стоимость не нормирована: max|Σ_x,i C̄ - 1| = {deviation:.3e}", residual=deviation
        )
    return kernel


def plan_cost_integral(costs: CostPair, stationary: StationaryDistribution) -> float:
    """∫c dπ = Σ ρ(x,i,j) c(x,i,j)."""
    rho = plan_triple_marginal(stationary)
    return float(np.sum(rho * costs.log_costs))


def plan_entropy(kernel: PlanKernel, stationary: StationaryDistribution) -> float:
    """H(π) = -Σ ρ(x,i,j) log C̄^x_{ij} (для марковского плана J_π = C̄)."""
    rho = plan_triple_marginal(stationary)
    return float(-np.sum(rho * np.log(kernel.cbar)))


def plan_pressure(costs: CostPair, kernel: PlanKernel, stationary: StationaryDistribution) -> float:
    """
    ∫c dπ + H(π). По двойственности равно p·φ̃₁ + (1-p)·φ̃₂.
    """
    return plan_cost_integral(costs, stationary) + plan_entropy(kernel, stationary)
