import numpy as np
import pytest

from app.errors import DomainError
from app.elton.chains import classical_chain, initial_window, plan_chain
from app.elton.sampler import (
    batch_layout,
    empirical_transition_counts,
    merge_estimates,
    replica_seeds,
    run_birkhoff,
    run_birkhoff_many,
    run_replicas,
    simulate,
)
from app.models.functions import IndicatorFunction
from app.models.potential import LocallyConstantPotential
from app.models.symbolic import Alphabet, WindowState, Word
from app.models.transport import PlanKernel
from app.oracle.markov import classical_finite_chain, exact_integral, plan_finite_chain, stationary

ALPHABET = Alphabet(2)


def _uniform_classical(seed=1, steps=10_000, window=1):
    uniform = LocallyConstantPotential.from_exp_matrix([[0.5, 0.5], [0.5, 0.5]])
    return classical_chain(uniform, WindowState.filled(ALPHABET, window), seed, steps)


def _share_within_3ci(estimates, exact):
    return sum(abs(e.mean - exact) <= 3 * e.ci_halfwidth for e in estimates) / len(estimates)


def test_batch_layout_uses_ceil_sqrt_batches():
    assert batch_layout(1_000_000) == (1000, 1000)
    assert batch_layout(10) == (4, 2)
    assert batch_layout(1) == (1, 1)


def test_constant_function_has_mean_one_and_zero_ci():
    estimate = run_birkhoff(_uniform_classical(), IndicatorFunction.parse("one"))
    assert estimate.mean == 1.0
    assert estimate.ci_halfwidth == 0.0
    assert estimate.count == 10_000


def test_same_seed_gives_identical_estimates():
    functions = [IndicatorFunction.parse("cyl:1"), IndicatorFunction.parse("cyl:11")]
    first = run_birkhoff_many(_uniform_classical(seed=7, window=2), functions)
    second = run_birkhoff_many(_uniform_classical(seed=7, window=2), functions)
    assert first == second


def test_different_seeds_give_different_trajectories():
    assert not np.array_equal(simulate(_uniform_classical(seed=1)), simulate(_uniform_classical(seed=2)))


def test_trajectory_starts_at_initial_state_without_burn_in(classical_normalized):
    z0 = WindowState.from_word(ALPHABET, Word.parse("2"))
    chain = classical_chain(classical_normalized, z0, 3, 50)
    assert simulate(chain)[0] == ALPHABET.index((2,))


def test_zero_steps_is_rejected():
    with pytest.raises(DomainError):
        _uniform_classical(steps=0)


def test_non_normalized_potential_is_rejected(classical_potential):
    with pytest.raises(DomainError):
        classical_chain(classical_potential, WindowState.filled(ALPHABET, 1), 0, 10)


def test_non_normalized_kernel_is_rejected():
    kernel = PlanKernel.from_matrices([[0.3, 0.3], [0.3, 0.3]], [[0.3, 0.3], [0.3, 0.3]])
    with pytest.raises(DomainError):
        plan_chain(kernel, 1, WindowState.filled(ALPHABET, 1), 0, 10)


def test_function_deeper_than_window_is_rejected():
    with pytest.raises(DomainError):
        run_birkhoff(_uniform_classical(window=1), IndicatorFunction.parse("cyl:12"))


def test_x_function_on_classical_chain_is_rejected():
    with pytest.raises(DomainError):
        run_birkhoff(_uniform_classical(), IndicatorFunction.parse("x:1"))


def test_initial_window_length_must_match():
    with pytest.raises(DomainError):
        initial_window(ALPHABET, 2, "1")
    assert initial_window(ALPHABET, 3).buffer == (1, 1, 1)


def test_uniform_plan_kernel_is_iid_on_four_branches():
    quarter = [[0.25, 0.25], [0.25, 0.25]]
    chain = plan_chain(PlanKernel.from_matrices(quarter, quarter), 1, WindowState.filled(ALPHABET, 1), 11, 100_000)
    estimate = run_birkhoff(chain, IndicatorFunction.parse("x:1+cyl:2"))
    assert abs(estimate.mean - 0.25) <= 3 * estimate.ci_halfwidth + 1e-3


def test_plan_chain_ignores_previous_x(example_kernel):
    chain = plan_chain(example_kernel, 1, WindowState.filled(ALPHABET, 2), 0, 10)
    words = ALPHABET.d ** chain.window
    np.testing.assert_array_equal(chain.weights[:words], chain.weights[words:])
    np.testing.assert_array_equal(chain.next_state[:words], chain.next_state[words:])


def test_debug_weights_mode_runs(example_kernel):
    chain = plan_chain(example_kernel, 2, WindowState.filled(ALPHABET, 1), 5, 1_000, debug_weights=True)
    estimate = run_birkhoff(chain, IndicatorFunction.parse("one"))
    assert estimate.mean == 1.0


def test_empirical_transitions_approach_kernel(classical_normalized):
    chain = classical_chain(classical_normalized, WindowState.filled(ALPHABET, 1), 2024, 200_000)
    counts = empirical_transition_counts(chain).astype(float)
    empirical = counts / counts.sum(axis=0, keepdims=True)
    kernel = np.exp(classical_normalized.table).reshape(2, 2)  # [i, w] = P(w -> i)
    np.testing.assert_allclose(empirical, kernel, atol=0.01)


def test_merge_is_associative_and_counts_add():
    f = [IndicatorFunction.parse("cyl:1")]
    parts = [run_birkhoff_many(_uniform_classical(seed=s, steps=4_000), f)[0] for s in (1, 2, 3)]
    flat = merge_estimates(parts)
    nested = merge_estimates([merge_estimates(parts[:2]), parts[2]])
    assert flat.count == 12_000
    assert flat.seed is None
    assert nested.mean == pytest.approx(flat.mean, rel=1e-14)
    assert nested.ci_halfwidth == pytest.approx(flat.ci_halfwidth, rel=1e-12)


def test_merge_rejects_mixed_functions():
    chain = _uniform_classical(steps=100)
    a = run_birkhoff(chain, IndicatorFunction.parse("one"))
    b = run_birkhoff(chain, IndicatorFunction.parse("cyl:1"))
    with pytest.raises(DomainError):
        merge_estimates([a, b])


def test_replica_seeds_are_consecutive_and_bounded():
    assert replica_seeds(10, 3) == [10, 11, 12]
    with pytest.raises(DomainError):
        replica_seeds(2**64 - 2, 3)


def test_replicas_do_not_depend_on_worker_count():
    chain = _uniform_classical(seed=40, steps=5_000, window=2)
    functions = [IndicatorFunction.parse("cyl:12"), IndicatorFunction.parse("one")]
    serial = run_replicas(chain, functions, chains=3, workers=1)
    pooled = run_replicas(chain, functions, chains=3, workers=2)
    assert serial == pooled
    per_replica, merged = serial
    assert [r[0].seed for r in per_replica] == [40, 41, 42]
    assert merged[1].mean == 1.0


def test_initial_state_does_not_change_the_limit(example_kernel):
    exact = exact_integral(stationary(plan_finite_chain(example_kernel, 2)), IndicatorFunction.parse("cyl:12"))
    f = IndicatorFunction.parse("cyl:12")
    for x0, word in [(1, "11"), (2, "22"), (2, "12")]:
        chain = plan_chain(example_kernel, x0, WindowState.from_word(ALPHABET, Word.parse(word)), 77, 200_000)
        estimate = run_birkhoff(chain, f)
        assert abs(estimate.mean - exact) <= 4 * estimate.ci_halfwidth


# --- Закон больших чисел: 20 seed, N = 10^6 ---


@pytest.mark.slow
def test_classical_birkhoff_averages_match_oracle(classical_normalized):
    functions = [IndicatorFunction.parse("cyl:1"), IndicatorFunction.parse("cyl:2")]
    dist = stationary(classical_finite_chain(classical_normalized, 1))
    chain = classical_chain(classical_normalized, WindowState.filled(ALPHABET, 1), 1000, 1_000_000)
    per_replica, _ = run_replicas(chain, functions, chains=20)
    for k, f in enumerate(functions):
        estimates = [replica[k] for replica in per_replica]
        assert _share_within_3ci(estimates, exact_integral(dist, f)) >= 0.95


@pytest.mark.slow
def test_plan_birkhoff_averages_match_oracle(example_kernel):
    functions = [IndicatorFunction.parse(s) for s in ("x:1", "cyl:1", "cyl:12")]
    dist = stationary(plan_finite_chain(example_kernel, 2))
    chain = plan_chain(example_kernel, 1, WindowState.filled(ALPHABET, 2), 5000, 1_000_000, burn_in=1_000)
    per_replica, merged = run_replicas(chain, functions, chains=20)
    for k, f in enumerate(functions):
        estimates = [replica[k] for replica in per_replica]
        assert _share_within_3ci(estimates, exact_integral(dist, f)) >= 0.95
    assert abs(merged[0].mean - 0.7) <= 3 * merged[0].ci_halfwidth
