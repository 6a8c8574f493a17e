# app/config.py
from pydantic import BaseModel, ConfigDict, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Tolerances(BaseModel):
    """
    Допуски численных процедур. Значения по умолчанию совпадают с контрактами
    модулей; конкретный запуск может переопределить любое поле в RunConfig.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    # --------- Perron-Frobenius ----------
    eigen_tol: float = Field(default=1e-12, gt=0)
    eigen_max_iter: int = Field(default=100_000, ge=1)
    normalization_tol: float = Field(default=1e-10, gt=0)

    # --------- Двойственная задача (конические сечения) ----------
    conic_tol: float = Field(default=1e-9, gt=0, description="Невязка точки на кониках после полировки")
    newton_tol: float = Field(default=1e-12, gt=0)
    newton_max_iter: int = Field(default=50, ge=1)
    spectral_band: float = Field(default=1e-9, gt=0, description="Полоса неоднозначности спектральной проверки")
    tie_tol: float = Field(default=1e-12, gt=0)
    stochastic_tol: float = Field(default=1e-10, gt=0)

    # --------- Ядро плана ----------
    perron_unit_tol: float = Field(default=1e-8, gt=0)
    kernel_tol: float = Field(default=1e-9, gt=0)

    # --------- Цепи Элтона ----------
    chain_weight_tol: float = Field(default=1e-10, gt=0)

    # --------- Оракул ----------
    stationary_tol: float = Field(default=1e-12, gt=0)
    stationary_crosscheck_tol: float = Field(default=1e-10, gt=0)
    preimage_cap: int = Field(default=1_000_000, ge=1)

    # ниже этого уровня расстояние в transfer_iterate считается шумом округления
    convergence_floor: float = Field(default=1e-13, ge=0)


DEFAULT_TOLERANCES = Tolerances()


class Settings(BaseSettings):
    """
    Конфиг окружения. Из параметров, видимых в отчёте, окружение задаёт только
    каталог отчётов (OUTPUT_DIR). WORKERS и DEBUG_WEIGHTS управляют исполнением
    и на значения отчёта не влияют; остальное — логирование.
    """

    # --------- Reports ----------
    output_dir: str = Field(
        default="reports",
        description="Каталог для CSV-отчётов (относительные пути output считаются от него)",
    )

    # --------- Execution ----------
    workers: int = Field(
        default=1,
        ge=1,
        description="Размер пула процессов для независимых реплик цепи; 1 — последовательно",
    )
    debug_weights: bool = Field(
        default=False,
        description="Проверять сумму весов ветвей в каждом посещённом состоянии",
    )

    # --------- Logging ----------
    log_dir: str = "logs"
    log_level: str = "INFO"
    console_log_level: str = "WARNING"
    log_file: str = "ergodic_transport.log"
    log_max_bytes: int = 5 * 1024 * 1024  # 5 MB
    log_backup_count: int = 3

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",  # лишние переменные окружения игнорируем
    )
