# app/cli.py
from typing import List, Optional

import typer
import logging
from pydantic import ValidationError

from app.config import Settings
from app.errors import ConfigError, ToolkitError
from app.logging_config import setup_logging
from app.models.enums import RunMode
from app.models.run_config import RunConfig, build_run_config, load_run_config
from app.services.run_service import RunService

log = logging.getLogger(__name__)
app = typer.Typer(add_completion=False)

# Коды выхода: 0 — успех, 1 — compare: fail, 2 — конфиг, 3 — область определения,
# 4 — численный метод, 5 — допустимого решения нет.
# Окружение влияет на результат только через OUTPUT_DIR. WORKERS и DEBUG_WEIGHTS
# управляют исполнением: байты отчёта от них не зависят, DEBUG_WEIGHTS лишь добавляет проверки.

FUNCTIONS_HELP = "Тестовая функция: one | cyl:12 | x:1 | x:1+cyl:12 (можно несколько раз)"


def _settings() -> Settings:
    try:
        return Settings()
    except ValidationError as e:
        typer.echo(f"❌ Некорректные переменные окружения: {e}", err=True)
        raise typer.Exit(code=ConfigError.exit_code)


def _execute(config_factory) -> None:
    """
    Общий цикл команды: настройки, логирование, конфиг, запуск, печать итогов.
    Ошибки тулкита печатаются одной строкой и превращаются в код выхода.
    """
    settings = _settings()
    setup_logging(settings)
    try:
        config: RunConfig = config_factory()
        log.info("Запуск команды %s", config.mode.value)
        report = RunService(settings).run(config)
    except ToolkitError as e:
        log.exception("Команда завершилась ошибкой")
        typer.echo(f"❌ {e}", err=True)
        raise typer.Exit(code=e.exit_code)

    for line in report.lines:
        typer.echo(line)
    typer.echo(f"✅ Отчёт: {report.path} (run_id={config.run_id})")
    log.info("Команда %s завершена", config.mode.value)
    if report.passed is False:
        raise typer.Exit(code=1)


def _fields(mode: RunMode, **options) -> dict:
    return {"mode": mode, **options}


@app.command()
def run(config: str = typer.Option(..., "--config", "-c", help="JSON-конфиг запуска (RunConfig)")):
    """
    Выполнить запуск по JSON-конфигу: режим и все параметры берутся из файла.
    """
    _execute(lambda: load_run_config(config))


@app.command()
def tf_normalize(
    input: str = typer.Argument(..., help="JSON потенциала"),
    function: Optional[List[str]] = typer.Option(None, "--function", "-f", help=FUNCTIONS_HELP),
    iterations: int = typer.Option(20, help="n для L^n(u)/λ^n"),
    output: Optional[str] = typer.Option(None, help="Имя CSV-отчёта (относительно OUTPUT_DIR)"),
):
    """
    Нормировать потенциал: λ, h, Ā, невязка нормировки и сходимость L^n(u)/λ^n.
    """
    _execute(lambda: build_run_config(**_fields(
        RunMode.TF_NORMALIZE, input=input, functions=function or None, iterations=iterations, output=output
    )))


@app.command()
def tf_sample(
    input: str = typer.Argument(..., help="JSON потенциала"),
    seed: int = typer.Option(0, help="64-битный seed генератора"),
    steps: int = typer.Option(..., help="N — длина траектории"),
    burn_in: int = typer.Option(0, help="Отбрасываемые начальные шаги"),
    chains: int = typer.Option(1, help="Число независимых реплик (seed, seed+1, ...)"),
    function: Optional[List[str]] = typer.Option(None, "--function", "-f", help=FUNCTIONS_HELP),
    initial_word: Optional[str] = typer.Option(None, help="Начальное окно z0 (по умолчанию 11...1)"),
    output: Optional[str] = typer.Option(None, help="Имя CSV-отчёта (относительно OUTPUT_DIR)"),
):
    """
    Средние Биркгофа по классической цепи Элтона для меры Гиббса.
    """
    _execute(lambda: build_run_config(**_fields(
        RunMode.TF_SAMPLE, input=input, seed=seed, steps=steps, burn_in=burn_in, chains=chains,
        functions=function or None, initial_word=initial_word, output=output,
    )))


@app.command()
def et_solve(
    input: str = typer.Argument(..., help="JSON пары стоимостей (C1, C2, p)"),
    output: Optional[str] = typer.Option(None, help="Имя CSV-отчёта (относительно OUTPUT_DIR)"),
):
    """
    Минимизатор двойственной задачи: z, φ̃ и таблица кандидатов.
    """
    _execute(lambda: build_run_config(**_fields(RunMode.ET_SOLVE, input=input, output=output)))


@app.command()
def et_kernel(
    input: str = typer.Argument(..., help="JSON пары стоимостей (C1, C2, p)"),
    output: Optional[str] = typer.Option(None, help="Имя CSV-отчёта (относительно OUTPUT_DIR)"),
):
    """
    Нормированное ядро плана: B, h, C̄ и проверка равенства двойственности.
    """
    _execute(lambda: build_run_config(**_fields(RunMode.ET_KERNEL, input=input, output=output)))


@app.command()
def et_sample(
    input: str = typer.Argument(..., help="JSON пары стоимостей (C1, C2, p)"),
    seed: int = typer.Option(0, help="64-битный seed генератора"),
    steps: int = typer.Option(..., help="N — длина траектории"),
    burn_in: int = typer.Option(0, help="Отбрасываемые начальные шаги"),
    chains: int = typer.Option(1, help="Число независимых реплик (seed, seed+1, ...)"),
    function: Optional[List[str]] = typer.Option(None, "--function", "-f", help=FUNCTIONS_HELP),
    initial_x: int = typer.Option(1, help="Начальное x0"),
    initial_word: Optional[str] = typer.Option(None, help="Начальное окно y0 (по умолчанию 11...1)"),
    output: Optional[str] = typer.Option(None, help="Имя CSV-отчёта (относительно OUTPUT_DIR)"),
):
    """
    Средние Биркгофа по цепи плана (x, y) -> (α, i·y).
    """
    _execute(lambda: build_run_config(**_fields(
        RunMode.ET_SAMPLE, input=input, seed=seed, steps=steps, burn_in=burn_in, chains=chains,
        functions=function or None, initial_x=initial_x, initial_word=initial_word, output=output,
    )))


@app.command()
def et_oracle(
    input: str = typer.Argument(..., help="JSON потенциала или пары стоимостей"),
    function: Optional[List[str]] = typer.Option(None, "--function", "-f", help=FUNCTIONS_HELP),
    output: Optional[str] = typer.Option(None, help="Имя CSV-отчёта (относительно OUTPUT_DIR)"),
):
    """
    Точные интегралы тестовых функций по стационарному распределению конечной цепи.
    """
    _execute(lambda: build_run_config(**_fields(
        RunMode.ET_ORACLE, input=input, functions=function or None, output=output
    )))


@app.command()
def compare(
    sampled: str = typer.Argument(..., help="CSV сэмплера (tf-sample / et-sample)"),
    reference: str = typer.Argument(..., help="CSV оракула (et-oracle)"),
    output: Optional[str] = typer.Option(None, help="Имя CSV-отчёта (относительно OUTPUT_DIR)"),
):
    """
    Сравнить оценки сэмплера с точными значениями по правилу 3·ci.
    Код выхода 1, если правило выполнено менее чем для 95% строк.
    """
    _execute(lambda: build_run_config(**_fields(
        RunMode.COMPARE, input=sampled, reference=reference, output=output
    )))


def main():
    app()


if __name__ == "__main__":
    main()
