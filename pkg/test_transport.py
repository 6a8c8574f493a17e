import math

import numpy as np
import pytest
from numpy.polynomial import Polynomial

from app.errors import DomainError, InconsistencyError, InfeasibleError
from app.models.enums import CandidateCheck
from app.models.transport import CostPair, DualSolution
from app.transport import dual as dual_module
from app.oracle.markov import classical_finite_chain, plan_finite_chain, stationary, y_pair_marginal
from app.transport.conics import (
    coefficients_from_matrices,
    conic_coefficients,
    conic_intersections,
    sylvester_resultant,
)
from app.transport.dual import (
    classify_candidate,
    is_column_stochastic,
    recover_p,
    solve_dual,
    solve_dual_stochastic_fast_path,
    subdominant_eigenvalue,
)
from app.transport.kernel import build_plan_kernel, cost_marginal_potential, normalize_cost
from app.thermo.transfer import normalize_potential, pressure
from conftest import (
    EXAMPLE_B,
    EXAMPLE_CBAR1,
    EXAMPLE_CBAR2,
    EXAMPLE_H,
    EXAMPLE_OBJECTIVE,
    EXAMPLE_Z,
    random_column_stochastic,
    random_costs,
)


def _feasible_instances(rng, count, attempts):
    found = []
    for _ in range(attempts):
        costs = random_costs(rng)
        try:
            solution = solve_dual(costs)
        except InfeasibleError:
            continue
        found.append((costs, solution))
        if len(found) == count:
            break
    return found


def test_conic_coefficients_of_example(example_costs):
    coeffs = conic_coefficients(example_costs)
    assert (coeffs.q_a, coeffs.q_b, coeffs.q_c, coeffs.q_d, coeffs.q_e) == pytest.approx((2, 2, -5, -7, -5))


def test_sylvester_resultant_of_two_lines():
    # f = z1 - z2, g = z1 + z2 - 2: Res_{z1} = 2 z2 - 2
    f = [Polynomial([0.0, -1.0]), Polynomial([1.0])]
    g = [Polynomial([-2.0, 1.0]), Polynomial([1.0])]
    res = sylvester_resultant(f, g)
    np.testing.assert_allclose(res.coef, [-2.0, 2.0])


def test_example_intersections_lie_on_both_conics(example_costs):
    coeffs = conic_coefficients(example_costs)
    points = conic_intersections(coeffs, example_costs.p)
    assert points
    for z1, z2, residual in points:
        assert residual <= 1e-9
        assert abs(coeffs.g(z1, z2)) <= 1e-9
        assert abs(coeffs.lagrange(z1, z2, example_costs.p)) <= 1e-9


def test_solve_dual_reproduces_example(example_costs):
    solution = solve_dual(example_costs)
    assert solution.z1 == pytest.approx(EXAMPLE_Z[0], abs=1e-5)
    assert solution.z2 == pytest.approx(EXAMPLE_Z[1], abs=1e-5)
    assert solution.objective == pytest.approx(EXAMPLE_OBJECTIVE, abs=1e-5)
    assert solution.subdominant < 1
    assert any(c.passed for c in solution.candidates)


def test_solution_has_zero_pressure(example_costs):
    solution = solve_dual(example_costs)
    b = solution.z1 * example_costs.c1 + solution.z2 * example_costs.c2
    assert max(abs(np.linalg.eigvals(b))) == pytest.approx(1.0, abs=1e-9)


def test_plan_kernel_reproduces_example(example_costs):
    solution = solve_dual(example_costs)
    kernel = build_plan_kernel(example_costs, solution)
    np.testing.assert_allclose(kernel.b_matrix, EXAMPLE_B, atol=1e-4)
    np.testing.assert_allclose(kernel.h, EXAMPLE_H, atol=1e-5)
    np.testing.assert_allclose(kernel.cbar[0], EXAMPLE_CBAR1, atol=1e-4)
    np.testing.assert_allclose(kernel.cbar[1], EXAMPLE_CBAR2, atol=1e-4)
    assert kernel.normalization_deviation <= 1e-9


@pytest.mark.parametrize("p", [0.1, 0.3, 0.5, 0.9])
def test_stochastic_costs_have_closed_form_solution(rng, p):
    for _ in range(10):
        costs = CostPair(random_column_stochastic(rng), random_column_stochastic(rng), p)
        assert is_column_stochastic(costs)
        solution = solve_dual(costs)
        assert solution.z1 == pytest.approx(p, abs=1e-9)
        assert solution.z2 == pytest.approx(1 - p, abs=1e-9)
        entropy = -p * math.log(p) - (1 - p) * math.log(1 - p)
        assert solution.objective == pytest.approx(entropy, abs=1e-9)


def test_fast_path_agrees_with_general_solver(rng):
    costs = CostPair(random_column_stochastic(rng), random_column_stochastic(rng), 0.3)
    fast = solve_dual_stochastic_fast_path(costs)
    general = solve_dual(costs)
    assert fast.z == pytest.approx(general.z, abs=1e-9)


def test_fast_path_rejects_non_stochastic_costs(example_costs):
    with pytest.raises(DomainError):
        solve_dual_stochastic_fast_path(example_costs)


def test_kernel_is_normalized_on_random_instances(rng):
    instances = _feasible_instances(rng, 100, 300)
    assert len(instances) == 100
    for costs, solution in instances:
        kernel = build_plan_kernel(costs, solution)
        np.testing.assert_allclose(kernel.column_sums, 1.0, atol=1e-9)


def test_minimizer_is_covariant_under_cost_shifts(example_costs):
    t1, t2 = 0.8, -0.35
    base = solve_dual(example_costs)
    shifted = solve_dual(example_costs.shifted(t1, t2))
    assert shifted.z1 == pytest.approx(base.z1 * math.exp(-t1), rel=1e-8)
    assert shifted.z2 == pytest.approx(base.z2 * math.exp(-t2), rel=1e-8)
    np.testing.assert_allclose(
        build_plan_kernel(example_costs.shifted(t1, t2), shifted).cbar,
        build_plan_kernel(example_costs, base).cbar,
        atol=1e-9,
    )


def test_dual_objective_is_below_unconstrained_pressure(example_costs):
    # P(c) >= ∫φ̃ dμ: без ограничения на x-маргинал давление не меньше
    solution = solve_dual(example_costs)
    assert pressure(cost_marginal_potential(example_costs)) >= solution.objective - 1e-9


def test_classify_candidate_flags_negative_point(example_costs):
    candidate = classify_candidate(example_costs, -0.1, 0.2, 0.0)
    assert CandidateCheck.POSITIVE in candidate.failed
    assert candidate.objective is None
    assert not candidate.passed


def test_subdominant_eigenvalue_on_the_conic(example_costs):
    solution = solve_dual(example_costs)
    assert subdominant_eigenvalue(example_costs, solution.z1, solution.z2) == pytest.approx(
        solution.subdominant
    )
    assert abs(solution.subdominant) < 1


def test_no_admissible_candidate_is_infeasible(example_costs, monkeypatch):
    monkeypatch.setattr(dual_module, "conic_intersections", lambda coeffs, p, tol: [(-0.5, 0.2, 0.0)])
    with pytest.raises(InfeasibleError) as info:
        solve_dual(example_costs)
    assert len(info.value.candidates) == 1
    assert CandidateCheck.POSITIVE in info.value.candidates[0].failed


def test_kernel_rejects_solution_off_the_pressure_curve(example_costs):
    wrong = DualSolution(z1=0.2, z2=0.1, p=example_costs.p, conic_residual=0.0, subdominant=0.0)
    with pytest.raises(InconsistencyError):
        build_plan_kernel(example_costs, wrong)


@pytest.mark.parametrize(
    "c1, c2, p",
    [
        ([[1, 0], [1, 1]], [[1, 1], [1, 1]], 0.5),
        ([[1, 1], [1, 1]], [[1, 1], [1, 1]], 1.0),
        ([[1, 1], [1, 1]], [[1, 1], [1, -2]], 0.5),
        ([[1, 1, 1], [1, 1, 1]], [[1, 1], [1, 1]], 0.5),
    ],
)
def test_cost_pair_validation(c1, c2, p):
    with pytest.raises(DomainError):
        CostPair(c1, c2, p)


def test_stochastic_costs_factor_the_conic(rng):
    # g(z) = (1 - z₁ - z₂)(1 - a z₁ - b z₂), a = det C¹, b = det C²
    for _ in range(20):
        c1, c2 = random_column_stochastic(rng), random_column_stochastic(rng)
        a, b = np.linalg.det(c1), np.linalg.det(c2)
        coeffs = coefficients_from_matrices(c1, c2)
        expected = (a, b, a + b, -(1 + a), -(1 + b))
        assert (coeffs.q_a, coeffs.q_b, coeffs.q_c, coeffs.q_d, coeffs.q_e) == pytest.approx(expected, abs=1e-12)
        for z1, z2 in rng.uniform(0.0, 2.0, (5, 2)):
            assert coeffs.g(z1, z2) == pytest.approx((1 - z1 - z2) * (1 - a * z1 - b * z2), abs=1e-12)


def test_uniform_costs_reduce_the_conic_to_a_line():
    half = np.full((2, 2), 0.5)
    coeffs = coefficients_from_matrices(half, half)
    assert (coeffs.q_a, coeffs.q_b, coeffs.q_c, coeffs.q_d, coeffs.q_e) == (0.0, 0.0, 0.0, -1.0, -1.0)

    solution = solve_dual(CostPair(half, half, 0.3))
    assert solution.z == pytest.approx((0.3, 0.7), abs=1e-12)
    assert solution.subdominant == pytest.approx(0.0, abs=1e-12)


def test_other_admissible_candidates_have_larger_objective(example_costs, rng):
    instances = [(example_costs, solve_dual(example_costs))] + _feasible_instances(rng, 30, 200)
    for costs, solution in instances:
        others = [c for c in solution.candidates if c.passed and (c.z1, c.z2) != solution.z]
        for candidate in others:
            assert candidate.objective > solution.objective


def test_recover_p_from_printed_example_point(example_costs):
    p = recover_p(example_costs.c1, example_costs.c2, *EXAMPLE_Z)
    assert 0 < p < 1
    assert p == pytest.approx(0.7, abs=1e-5)


def test_recover_p_inverts_the_dual_solver(rng):
    for costs, solution in _feasible_instances(rng, 30, 200):
        assert recover_p(costs.c1, costs.c2, solution.z1, solution.z2) == pytest.approx(costs.p, abs=1e-7)


def test_recover_p_rejects_point_off_the_conic(example_costs):
    with pytest.raises(InconsistencyError):
        recover_p(example_costs.c1, example_costs.c2, 0.2, 0.2)
    with pytest.raises(DomainError):
        recover_p(example_costs.c1, example_costs.c2, -0.1, 0.2)


@pytest.mark.parametrize("seeded", [False, True])
def test_normalized_cost_projects_to_gibbs_measure_of_marginal(example_costs, rng, seeded):
    costs = random_costs(rng) if seeded else example_costs
    kernel = normalize_cost(costs)
    assert kernel.normalization_deviation <= 1e-9
    assert kernel.origin is None

    plan = y_pair_marginal(stationary(plan_finite_chain(kernel, 2)))
    gibbs_potential = normalize_potential(cost_marginal_potential(costs))
    gibbs = y_pair_marginal(stationary(classical_finite_chain(gibbs_potential, 2)))
    np.testing.assert_allclose(plan, gibbs, atol=1e-9)
