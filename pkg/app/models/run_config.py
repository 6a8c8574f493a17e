# app/models/run_config.py
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from app.config import Tolerances
from app.errors import ConfigError
from app.models.enums import RunMode
from app.models.functions import IndicatorFunction
from app.utils.parsing import parse_function_spec, parse_word

SAMPLING_MODES = {RunMode.TF_SAMPLE, RunMode.ET_SAMPLE}


class RunConfig(BaseModel):
    """
    Полный конфиг одного запуска. Сериализованная форма (resolved_json) пишется
    в шапку каждого отчёта и определяет run_id.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    mode: RunMode
    input: Optional[str] = Field(default=None, description="JSON потенциала/стоимости; для compare — CSV сэмплера")
    reference: Optional[str] = Field(default=None, description="Только compare: CSV оракула")

    # --------- Сэмплер ----------
    seed: int = Field(default=0, ge=0, lt=2**64)
    steps: Optional[int] = Field(default=None, ge=1, description="N — длина траектории")
    burn_in: int = Field(default=0, ge=0)
    chains: int = Field(default=1, ge=1, description="Число независимых реплик (seed, seed+1, ...)")
    initial_x: int = Field(default=1, ge=1)
    initial_word: Optional[str] = None

    # --------- Функции и операторы ----------
    functions: List[str] = Field(default_factory=lambda: ["one"])
    iterations: int = Field(default=20, ge=1, description="n для L^n(u)/λ^n в tf-normalize")

    output: Optional[str] = None
    tolerances: Tolerances = Field(default_factory=Tolerances)

    @field_validator("functions")
    @classmethod
    def _check_functions(cls, value: List[str]) -> List[str]:
        if not value:
            raise ValueError("список функций пуст")
        normalized = [spec.strip().lower() for spec in value]
        for spec in normalized:
            parse_function_spec(spec)
        if len(set(normalized)) != len(normalized):
            raise ValueError("функции в списке повторяются")
        return normalized

    @field_validator("initial_word")
    @classmethod
    def _check_word(cls, value: Optional[str]) -> Optional[str]:
        if value:
            parse_word(value)
        return value or None

    @model_validator(mode="after")
    def _mode_requirements(self) -> "RunConfig":
        if not self.input:
            raise ValueError(f"режим {self.mode.value} требует поле 'input'")
        if self.mode == RunMode.COMPARE and not self.reference:
            raise ValueError("режим compare требует поле 'reference' (CSV оракула)")
        if self.mode in SAMPLING_MODES and self.steps is None:
            raise ValueError(f"режим {self.mode.value} требует поле 'steps' (N >= 1)")
        return self

    # --- Производные ---

    def indicator_functions(self) -> List[IndicatorFunction]:
        return [IndicatorFunction.parse(spec) for spec in self.functions]

    def resolved_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, ensure_ascii=False, separators=(",", ":"))

    @property
    def run_id(self) -> str:
        return hashlib.sha256(self.resolved_json().encode("utf-8")).hexdigest()[:12]


def build_run_config(**fields) -> RunConfig:
    """Собирает RunConfig; ошибки валидации превращаются в ConfigError (код выхода 2)."""
    try:
        return RunConfig(**{k: v for k, v in fields.items() if v is not None})
    except ValidationError as e:
        raise ConfigError(f"Конфиг не прошёл валидацию:\n{e}") from e


def load_run_config(path: str) -> RunConfig:
    file = Path(path)
    if not file.is_file():
        raise ConfigError(f"Файл конфига не найден: {path}")
    try:
        data = json.loads(file.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"Конфиг {path} не является корректным JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"Корень конфига {path} должен быть объектом")
    return build_run_config(**data)
