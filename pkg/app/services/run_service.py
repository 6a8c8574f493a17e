# app/services/run_service.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from app.config import Settings
from app.datasources.files import CsvReportSource, JsonDocumentSource
from app.elton.chains import classical_chain, initial_window, plan_chain
from app.elton.sampler import run_replicas
from app.errors import ConfigError, DomainError, InconsistencyError
from app.mappers.document_mapper import document_to_costs, document_to_potential, is_cost_document
from app.models.chain import ChainSpec, Estimate
from app.models.enums import RunMode
from app.models.functions import IndicatorFunction
from app.models.potential import LocallyConstantPotential
from app.models.report import ReportRow
from app.models.run_config import RunConfig
from app.models.symbolic import Alphabet, window_length
from app.models.transport import CostPair, DualSolution, PlanKernel
from app.oracle.markov import (
    classical_finite_chain,
    exact_integral,
    plan_finite_chain,
    shift_invariance_defect,
    stationary,
    variational_terms,
    x_marginal,
)
from app.services.reports import estimate_row, residuals, value_row, write_report
from app.thermo.transfer import normalize_with_diagnostics, transfer_iterate
from app.transport.dual import (
    describe_candidates,
    is_column_stochastic,
    solve_dual,
    solve_dual_stochastic_fast_path,
)
from app.transport.kernel import build_plan_kernel, plan_cost_integral, plan_entropy, plan_pressure
from app.utils.text import fmt, format_matrix

log = logging.getLogger(__name__)

# compare: доля строк, прошедших правило 3·ci, при которой прогон считается успешным
COMPARE_PASS_SHARE = 0.95
# compare: при ci = 0 значения считаются совпавшими до этой разницы
EXACT_MATCH_TOL = 1e-12
# расхождение общего решения двойственной задачи и явной формулы для стохастических C1, C2
FAST_PATH_TOL = 1e-9


@dataclass(slots=True)
class RunReport:
    config: RunConfig
    rows: List[ReportRow]
    lines: List[str] = field(default_factory=list)
    path: Optional[Path] = None
    passed: Optional[bool] = None  # только для compare


class RunService:
    """
    Сервис одного запуска: читает входной документ, выполняет режим
    и пишет CSV-отчёт.

    Основной сценарий:
      - tf-normalize / tf-sample — потенциал, нормировка, классическая цепь;
      - et-solve / et-kernel / et-sample — стоимость, двойственная задача, ядро, цепь плана;
      - et-oracle — точные интегралы по стационарному распределению;
      - compare — сравнение CSV сэмплера с CSV оракула.
    """

    def __init__(self, settings: Settings) -> None:
        self.settings = settings
        self._handlers: Dict[RunMode, Callable[[RunConfig], RunReport]] = {
            RunMode.TF_NORMALIZE: self._tf_normalize,
            RunMode.TF_SAMPLE: self._tf_sample,
            RunMode.ET_SOLVE: self._et_solve,
            RunMode.ET_KERNEL: self._et_kernel,
            RunMode.ET_SAMPLE: self._et_sample,
            RunMode.ET_ORACLE: self._et_oracle,
            RunMode.COMPARE: self._compare,
        }

    # --- Публичный API ---

    def run(self, config: RunConfig) -> RunReport:
        log.info("Запуск режима %s (run_id=%s)", config.mode.value, config.run_id)
        report = self._handlers[config.mode](config)
        report.path = write_report(self.settings, config, report.rows)
        log.info("Режим %s завершён: %d строк(и) отчёта", config.mode.value, len(report.rows))
        return report

    # --- Загрузка входных данных ---

    def _load_potential(self, config: RunConfig) -> LocallyConstantPotential:
        document = JsonDocumentSource(config.input).fetch_document()
        if is_cost_document(document):
            raise ConfigError(f"Режим {config.mode.value} ожидает потенциал, а во входе пара стоимостей")
        return document_to_potential(document)

    def _load_costs(self, config: RunConfig) -> CostPair:
        document = JsonDocumentSource(config.input).fetch_document()
        if not is_cost_document(document):
            raise ConfigError(f"Режим {config.mode.value} ожидает пару стоимостей (C1, C2, p)")
        return document_to_costs(document)

    @staticmethod
    def _classical_functions(config: RunConfig) -> List[IndicatorFunction]:
        functions = config.indicator_functions()
        for f in functions:
            if f.x is not None:
                raise DomainError(f"Функция {f.function_id!r} зависит от x: в классическом режиме x нет")
        return functions

    # --- Классическая сторона ---

    def _tf_normalize(self, config: RunConfig) -> RunReport:
        tol = config.tolerances
        potential = self._load_potential(config)
        functions = self._classical_functions(config)
        result = normalize_with_diagnostics(potential, tol)
        lam = result.eigenpair.eigenvalue

        lines = [
            f"λ = {fmt(lam)}",
            f"P(A) = log λ = {fmt(math.log(lam))}",
            f"h = [{', '.join(fmt(v) for v in result.eigenpair.vector)}]",
            "Ā:",
            *[f"  {word}: {fmt(value)}" for word, value in result.potential.as_mapping().items()],
            f"max|Σ_i e^Ā(i·w) - 1| = {result.residual:.3e}",
        ]
        rows = [
            value_row(config, "pressure", math.log(lam), eigen_residual=result.eigenpair.residual),
        ]
        for f in functions:
            u = LocallyConstantPotential.cylinder_indicator(potential.alphabet, f.word)
            base = potential if u.depth <= potential.depth else potential.lift(u.depth)
            it = transfer_iterate(base, u, config.iterations, tol)
            lines.append(
                f"{f.function_id}: ∫u dμ_A = {fmt(it.gibbs_integral)}, "
                f"sup|L^n u/λ^n - h·∫u dν| = {it.distance:.3e} (n={config.iterations})"
            )
            rows.append(
                value_row(
                    config,
                    f.function_id,
                    it.gibbs_integral,
                    n=config.iterations,
                    distance=it.distance,
                    monotone=it.monotone,
                    normalization=result.residual,
                )
            )
        return RunReport(config=config, rows=rows, lines=lines)

    def _tf_sample(self, config: RunConfig) -> RunReport:
        tol = config.tolerances
        potential = self._load_potential(config)
        functions = self._classical_functions(config)
        normalized = normalize_with_diagnostics(potential, tol).potential

        window = window_length(potential.depth, (f.depth for f in functions))
        z0 = initial_window(potential.alphabet, window, config.initial_word)
        chain = classical_chain(
            normalized, z0, config.seed, config.steps, config.burn_in, tol, self.settings.debug_weights
        )
        return self._sample(config, chain, functions)

    # --- Транспортная сторона ---

    def _solve(self, config: RunConfig, costs: CostPair) -> DualSolution:
        tol = config.tolerances
        solution = solve_dual(costs, tol)
        if is_column_stochastic(costs, tol.stochastic_tol):
            fast = solve_dual_stochastic_fast_path(costs, tol)
            gap = max(abs(fast.z1 - solution.z1), abs(fast.z2 - solution.z2))
            if gap > FAST_PATH_TOL:
                raise InconsistencyError(
                    f"Общее решение и явная формула для стохастических C1, C2 расходятся на {gap:.3e}",
                    residual=gap,
                )
            log.info("Стохастический случай: явная формула z=(p, 1-p) подтверждена (расхождение %.3e)", gap)
        return solution

    def _kernel(self, config: RunConfig, costs: CostPair) -> Tuple[DualSolution, PlanKernel]:
        solution = self._solve(config, costs)
        return solution, build_plan_kernel(costs, solution, config.tolerances)

    def _et_solve(self, config: RunConfig) -> RunReport:
        costs = self._load_costs(config)
        solution = self._solve(config, costs)
        extra = dict(conic=solution.conic_residual, lambda2=solution.subdominant)
        rows = [
            value_row(config, "z1", solution.z1, **extra),
            value_row(config, "z2", solution.z2, **extra),
            value_row(config, "phi1", solution.phi1, **extra),
            value_row(config, "phi2", solution.phi2, **extra),
            value_row(config, "dual_objective", solution.objective, **extra),
        ]
        lines = [
            f"z = ({fmt(solution.z1)}, {fmt(solution.z2)})",
            f"φ̃ = ({fmt(solution.phi1)}, {fmt(solution.phi2)})",
            f"p·φ̃₁ + (1-p)·φ̃₂ = {fmt(solution.objective)}",
            "Кандидаты:",
            describe_candidates(solution.candidates),
        ]
        return RunReport(config=config, rows=rows, lines=lines)

    def _et_kernel(self, config: RunConfig) -> RunReport:
        tol = config.tolerances
        costs = self._load_costs(config)
        solution, kernel = self._kernel(config, costs)

        dist = stationary(plan_finite_chain(kernel, 2, tol), tol)
        cost_part = plan_cost_integral(costs, dist)
        entropy = plan_entropy(kernel, dist)
        pressure = plan_pressure(costs, kernel, dist)
        gap = abs(pressure - solution.objective)

        rows = [
            value_row(config, f"h:{k + 1}", float(v)) for k, v in enumerate(kernel.h)
        ]
        for x in kernel.x_values:
            for i in range(kernel.d):
                for j in range(kernel.d):
                    rows.append(value_row(config, f"cbar:{x}{i + 1}{j + 1}", float(kernel.cbar[x - 1, i, j])))
        rows += [
            value_row(config, "plan_cost", cost_part),
            value_row(config, "plan_entropy", entropy),
            value_row(config, "plan_pressure", pressure, duality_gap=gap),
            value_row(config, "dual_objective", solution.objective, duality_gap=gap),
        ]
        lines = [
            f"B = {format_matrix(kernel.b_matrix)}",
            f"h = [{', '.join(fmt(v) for v in kernel.h)}]",
            *[f"C̄{x} = {format_matrix(kernel.cbar[x - 1])}" for x in kernel.x_values],
            f"Σ_x,i C̄ по столбцам = [{', '.join(fmt(v) for v in kernel.column_sums)}]",
            f"∫c dπ + H(π) = {fmt(pressure)}, p·φ̃₁ + (1-p)·φ̃₂ = {fmt(solution.objective)}, разница {gap:.3e}",
        ]
        return RunReport(config=config, rows=rows, lines=lines)

    def _et_sample(self, config: RunConfig) -> RunReport:
        tol = config.tolerances
        costs = self._load_costs(config)
        _, kernel = self._kernel(config, costs)
        functions = config.indicator_functions()

        window = window_length(2, (f.depth for f in functions))
        y0 = initial_window(Alphabet(kernel.d), window, config.initial_word)
        chain = plan_chain(
            kernel, config.initial_x, y0, config.seed, config.steps, config.burn_in, tol, self.settings.debug_weights
        )
        return self._sample(config, chain, functions)

    # --- Оракул ---

    def _et_oracle(self, config: RunConfig) -> RunReport:
        tol = config.tolerances
        document = JsonDocumentSource(config.input).fetch_document()
        functions = config.indicator_functions()
        depths = [f.depth for f in functions]
        lines: List[str] = []

        if is_cost_document(document):
            costs = document_to_costs(document)
            _, kernel = self._kernel(config, costs)
            window = max(window_length(2, depths), 2)
            dist = stationary(plan_finite_chain(kernel, window, tol), tol)
            lines.append(f"x-маргинал = [{', '.join(fmt(v) for v in x_marginal(dist))}]")
            lines.append(f"σ-инвариантность y-маргинала: отклонение {shift_invariance_defect(dist):.3e}")
        else:
            potential = document_to_potential(document)
            if any(f.x is not None for f in functions):
                raise DomainError("Функции с условием на x требуют пару стоимостей во входе")
            normalized = normalize_with_diagnostics(potential, tol).potential
            window = max(window_length(potential.depth, depths), potential.depth)
            dist = stationary(classical_finite_chain(normalized, window, tol), tol)
            energy, entropy = variational_terms(potential, normalized, dist)
            lines.append(f"∫A dμ_A = {fmt(energy)}, h(μ_A) = {fmt(entropy)}, сумма = {fmt(energy + entropy)}")

        lines.append(f"Стационарное распределение ({len(dist.states)} состояний):")
        for (x, word), prob in zip(dist.states, dist.probabilities):
            label = f"({x}, {word})" if x is not None else str(word)
            lines.append(f"  {label}: {fmt(prob)}")

        rows = []
        for f in functions:
            value = exact_integral(dist, f)
            lines.append(f"{f.function_id}: {fmt(value)}")
            rows.append(value_row(config, f.function_id, value, stationary_residual=dist.residual))
        return RunReport(config=config, rows=rows, lines=lines)

    # --- Сравнение ---

    def _compare(self, config: RunConfig) -> RunReport:
        sampled = CsvReportSource(config.input).fetch_rows()
        reference = CsvReportSource(config.reference).fetch_rows()
        exact = {row.function_id: row.value_float() for row in reference}

        rows: List[ReportRow] = []
        passed_count = 0
        for row in sampled:
            if row.is_merged:
                continue
            if row.function_id not in exact:
                raise ConfigError(f"Для функции {row.function_id!r} нет точного значения в {config.reference}")
            target = exact[row.function_id]
            diff = row.value_float() - target
            ci = row.ci_float()
            if ci > 0:
                ratio = diff / ci
                ok = abs(diff) <= 3 * ci
            else:
                ok = abs(diff) <= EXACT_MATCH_TOL
                ratio = 0.0 if ok else math.copysign(math.inf, diff)
            passed_count += ok
            rows.append(
                ReportRow(
                    run_id=config.run_id,
                    mode=config.mode.value,
                    function_id=row.function_id,
                    value=fmt(ratio),
                    ci_halfwidth=row.ci_halfwidth,
                    n=row.n,
                    seed=row.seed,
                    residuals=residuals(exact=target, verdict="pass" if ok else "fail"),
                )
            )

        if not rows:
            raise ConfigError(f"В {config.input} нет строк отдельных реплик для сравнения")
        share = passed_count / len(rows)
        passed = share >= COMPARE_PASS_SHARE
        lines = [f"Прошли правило 3·ci: {passed_count} из {len(rows)} ({share:.1%}) — {'pass' if passed else 'fail'}"]
        return RunReport(config=config, rows=rows, lines=lines, passed=passed)

    # --- Общее для сэмплеров ---

    def _sample(self, config: RunConfig, chain: ChainSpec, functions: List[IndicatorFunction]) -> RunReport:
        per_replica, merged = run_replicas(
            chain, functions, config.chains, self.settings.workers, config.tolerances
        )
        estimates: List[Estimate] = [e for replica in per_replica for e in replica]
        if config.chains > 1:
            estimates += merged
        rows = [estimate_row(config, e) for e in estimates]
        lines = [
            f"{e.function_id}: {fmt(e.mean)} ± {fmt(e.ci_halfwidth)} (N={e.count}, seed={'все' if e.seed is None else e.seed})"
            for e in estimates
        ]
        return RunReport(config=config, rows=rows, lines=lines)
