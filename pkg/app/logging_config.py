# app/logging_config.py
import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path

from .config import Settings

LOG_FORMAT = "%(asctime)s | %(levelname)s | %(processName)s | %(name)s | %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def _level(name: str, default: int) -> int:
    return getattr(logging, (name or "").upper(), default)


def setup_logging(settings: Settings) -> Path:
    """
    Логирование запуска:
    - файл settings.log_dir/settings.log_file с ротацией (log_max_bytes, log_backup_count),
      уровень settings.log_level;
    - консоль (stderr) с уровнем settings.console_log_level, stdout остаётся под отчёт.
    Возвращает путь к файлу лога.
    """
    log_path = Path(settings.log_dir) / settings.log_file
    log_path.parent.mkdir(parents=True, exist_ok=True)
    formatter = logging.Formatter(fmt=LOG_FORMAT, datefmt=DATE_FORMAT)

    file_handler = RotatingFileHandler(
        log_path,
        maxBytes=settings.log_max_bytes,
        backupCount=settings.log_backup_count,
        encoding="utf-8",
    )
    file_handler.setFormatter(formatter)

    console = logging.StreamHandler()
    console.setFormatter(formatter)
    console.setLevel(_level(settings.console_log_level, logging.WARNING))

    root = logging.getLogger()
    for handler in root.handlers:
        handler.close()
    root.handlers.clear()
    root.setLevel(_level(settings.log_level, logging.INFO))
    root.addHandler(file_handler)
    root.addHandler(console)
    return log_path
