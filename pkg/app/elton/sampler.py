# app/elton/sampler.py
"""
Симуляция цепей Элтона и оценки Биркгофа (1/N) Σ_{k<N} f(z_k).

Генератор: numpy PCG64, инициализированный SeedSequence(seed). Все равномерные
числа траектории берутся одним вызовом rng.random(burn_in + N - 1); ветвь
выбирается обратной функцией распределения по упорядоченному списку ветвей.
Так траектория однозначно задаётся (цепь, seed).
"""
from __future__ import annotations

import logging
import math
from bisect import bisect_right
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from app.config import DEFAULT_TOLERANCES, Tolerances
from app.errors import DomainError
from app.models.chain import ChainSpec, Estimate
from app.models.functions import IndicatorFunction

log = logging.getLogger(__name__)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def simulate(chain: ChainSpec, tolerances: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """
    Номера состояний z_0..z_{N-1} после отброшенных burn_in шагов
    (z_0 — состояние после burn_in переходов из начального).
    """
    transitions = chain.burn_in + chain.steps - 1
    uniforms = make_rng(chain.seed).random(transitions).tolist()

    cumulative = np.cumsum(chain.weights, axis=1).tolist()
    next_state = chain.next_state.tolist()
    last = len(chain.branches) - 1

    if chain.debug_weights:
        sums = chain.weights.sum(axis=1)
        checked = set()

    trajectory = np.empty(chain.steps, dtype=np.int64)
    state = chain.initial_state
    record_from = chain.burn_in
    for k in range(transitions + 1):
        if k >= record_from:
            trajectory[k - record_from] = state
        if k == transitions:
            break
        if chain.debug_weights and state not in checked:
            if abs(sums[state] - 1.0) > tolerances.chain_weight_tol:
                raise DomainError(
                    f"Веса ветвей в состоянии {state} суммируются в {sums[state]:.15g}"
                )
            checked.add(state)
        branch = bisect_right(cumulative[state], uniforms[k])
        state = next_state[state][min(branch, last)]
    return trajectory


def _function_table(chain: ChainSpec, f: IndicatorFunction) -> np.ndarray:
    """f на всех состояниях цепи (значения индикатора — 0/1)."""
    if f.depth > chain.window:
        raise DomainError(f"Глубина функции {f.function_id!r} ({f.depth}) больше окна цепи {chain.window}")
    if f.x is not None:
        if not chain.is_plan:
            raise DomainError(f"Функция {f.function_id!r} зависит от x, а цепь классическая")
        if f.x not in chain.x_values:
            raise DomainError(f"Функция {f.function_id!r}: x={f.x} вне X = {list(chain.x_values)}")
    table = np.empty(chain.n_states)
    for s in range(chain.n_states):
        x, state = chain.state_of(s)
        table[s] = f.evaluate(state, x)
    return table


def batch_layout(n: int) -> Tuple[int, int]:
    """⌈√N⌉ батчей по N // ⌈√N⌉ значений; хвост, не вошедший в батчи, учитывается только в среднем."""
    count = math.isqrt(n - 1) + 1 if n > 1 else 1
    return count, n // count


def _interval(batch_count: int, batch_size: int, batch_sum: float, batch_sumsq: float) -> Tuple[float, float]:
    """(b·Var(батч-средних), полуширина 95% по t-распределению)."""
    if batch_count < 2:
        return 0.0, 0.0
    var = max((batch_sumsq - batch_sum**2 / batch_count) / (batch_count - 1), 0.0)
    half = float(stats.t.ppf(0.975, batch_count - 1)) * math.sqrt(var / batch_count)
    return batch_size * var, half


def estimate_from_values(function_id: str, values: np.ndarray, seed: Optional[int]) -> Estimate:
    n = int(values.size)
    if n < 1:
        raise DomainError("Оценка по пустой траектории")
    count, size = batch_layout(n)
    means = values[: count * size].reshape(count, size).mean(axis=1)
    batch_sum, batch_sumsq = float(means.sum()), float(np.sum(means**2))
    if np.all(means == means[0]):
        # постоянные батч-средние: дисперсия ровно 0, без шума округления сумм
        variance, half = 0.0, 0.0
    else:
        variance, half = _interval(count, size, batch_sum, batch_sumsq)
    total = float(values.sum())
    return Estimate(
        function_id=function_id,
        mean=total / n,
        count=n,
        batch_variance=variance,
        ci_halfwidth=half,
        seed=seed,
        total=total,
        batch_count=count,
        batch_size=size,
        batch_sum=batch_sum,
        batch_sumsq=batch_sumsq,
    )


def run_birkhoff_many(
    chain: ChainSpec, functions: Sequence[IndicatorFunction], tolerances: Tolerances = DEFAULT_TOLERANCES
) -> List[Estimate]:
    """Одна траектория, оценки для всех функций (в порядке functions)."""
    tables = [_function_table(chain, f) for f in functions]
    trajectory = simulate(chain, tolerances)
    estimates = [estimate_from_values(f.function_id, table[trajectory], chain.seed) for f, table in zip(functions, tables)]
    for e in estimates:
        log.debug("seed=%d %s: среднее %.6g ± %.2g (N=%d)", chain.seed, e.function_id, e.mean, e.ci_halfwidth, e.count)
    return estimates


def run_birkhoff(
    chain: ChainSpec, f: IndicatorFunction, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> Estimate:
    return run_birkhoff_many(chain, [f], tolerances)[0]


def merge_estimates(estimates: Sequence[Estimate]) -> Estimate:
    """
    Слияние оценок одной функции по независимым цепям: суммы складываются,
    батч-средние объединяются в общий набор. Операция ассоциативна.
    """
    if not estimates:
        raise DomainError("Нечего сливать: список оценок пуст")
    ids = {e.function_id for e in estimates}
    if len(ids) != 1:
        raise DomainError(f"Сливать можно только оценки одной функции, получено {sorted(ids)}")
    sizes = {e.batch_size for e in estimates}
    if len(sizes) != 1:
        raise DomainError("Оценки с разным размером батча не сливаются")

    count = sum(e.count for e in estimates)
    total = math.fsum(e.total for e in estimates)
    batch_count = sum(e.batch_count for e in estimates)
    batch_sum = math.fsum(e.batch_sum for e in estimates)
    batch_sumsq = math.fsum(e.batch_sumsq for e in estimates)
    size = sizes.pop()
    if all(e.batch_variance == 0 and e.ci_halfwidth == 0 for e in estimates) and len({e.mean for e in estimates}) == 1:
        variance, half = 0.0, 0.0
    else:
        variance, half = _interval(batch_count, size, batch_sum, batch_sumsq)
    return Estimate(
        function_id=ids.pop(),
        mean=total / count,
        count=count,
        batch_variance=variance,
        ci_halfwidth=half,
        seed=None,
        total=total,
        batch_count=batch_count,
        batch_size=size,
        batch_sum=batch_sum,
        batch_sumsq=batch_sumsq,
    )


def replica_seeds(seed: int, chains: int) -> List[int]:
    if chains < 1:
        raise DomainError(f"Число цепей должно быть >= 1, получено {chains}")
    seeds = [seed + r for r in range(chains)]
    if seeds[-1] >= 2**64:
        raise DomainError(f"seed + chains - 1 выходит за 64 бита: {seeds[-1]}")
    return seeds


def _replica_job(args: Tuple[ChainSpec, Tuple[IndicatorFunction, ...], Tolerances]) -> List[Estimate]:
    chain, functions, tolerances = args
    return run_birkhoff_many(chain, functions, tolerances)


def run_replicas(
    chain: ChainSpec,
    functions: Sequence[IndicatorFunction],
    chains: int = 1,
    workers: int = 1,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Tuple[List[List[Estimate]], List[Estimate]]:
    """
    Независимые реплики с seed, seed+1, ..., seed+chains-1.
    Возвращает оценки по репликам (в порядке seed) и слитые оценки по функциям.
    Результат не зависит от workers: слияние идёт в порядке seed.
    """
    jobs = [(replace(chain, seed=s), tuple(functions), tolerances) for s in replica_seeds(chain.seed, chains)]
    if workers > 1 and len(jobs) > 1:
        log.info("Запуск %d реплик в пуле из %d процессов", len(jobs), workers)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_replica = list(pool.map(_replica_job, jobs))
    else:
        per_replica = [_replica_job(job) for job in jobs]

    by_function: Dict[str, List[Estimate]] = {}
    for estimates in per_replica:
        for e in estimates:
            by_function.setdefault(e.function_id, []).append(e)
    merged = [merge_estimates(by_function[f.function_id]) for f in functions]
    return per_replica, merged


def empirical_transition_counts(chain: ChainSpec, tolerances: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """counts[to, from] — число наблюдавшихся переходов между состояниями цепи."""
    trajectory = simulate(chain, tolerances)
    counts = np.zeros((chain.n_states, chain.n_states), dtype=np.int64)
    np.add.at(counts, (trajectory[1:], trajectory[:-1]), 1)
    return counts
