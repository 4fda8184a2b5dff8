"""
Централизованная настройка логирования для DGNN.

Настраивает loguru для записи логов в консоль (совместимо с tqdm) и файлы.
"""

from pathlib import Path
from loguru import logger
from tqdm import tqdm
from typing import Optional

from config.settings import get_settings


def _tqdm_sink(message) -> None:
    """Вывод в консоль без разрыва прогресс-баров tqdm."""
    tqdm.write(str(message), end="")


def setup_logging(
    log_level: Optional[str] = None,
    log_file: Optional[str] = None,
    log_error_file: Optional[str] = None,
    log_format: Optional[str] = None,
    log_rotation: Optional[str] = None,
    log_retention: Optional[str] = None,
    debug: Optional[bool] = None
) -> None:
    """
    Настройка логирования для приложения.

    Args:
        log_level: Уровень логирования (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Путь к основному файлу логов, пустая строка отключает файл
        log_error_file: Путь к файлу логов ошибок, пустая строка отключает файл
        log_format: Формат записи логов
        log_rotation: Период ротации логов
        log_retention: Время хранения логов
        debug: Режим отладки
    """
    settings = get_settings()

    log_level = (log_level or settings.LOG_LEVEL).upper()
    log_file = settings.LOG_FILE if log_file is None else log_file
    log_error_file = settings.LOG_ERROR_FILE if log_error_file is None else log_error_file
    log_format = log_format or settings.LOG_FORMAT
    log_rotation = log_rotation or settings.LOG_ROTATION
    log_retention = log_retention or settings.LOG_RETENTION
    debug = debug if debug is not None else settings.DEBUG

    logger.remove()

    console_format = (
        "<green>{time:HH:mm:ss}</green> | "
        "<level>{level: <8}</level> | "
        "<cyan>{name}</cyan>:<cyan>{function}</cyan> - "
        "<level>{message}</level>"
    )

    logger.add(
        _tqdm_sink,
        level=log_level,
        format=console_format,
        colorize=True,
        backtrace=debug,
        diagnose=debug
    )

    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)

        # Основной файл логов (все уровни)
        logger.add(
            log_file,
            level="DEBUG",
            format=log_format,
            rotation=log_rotation,
            retention=log_retention,
            compression="zip",
            backtrace=debug,
            diagnose=debug,
            encoding="utf-8"
        )

    if log_error_file:
        Path(log_error_file).parent.mkdir(parents=True, exist_ok=True)

        # Только ERROR и CRITICAL
        logger.add(
            log_error_file,
            level="ERROR",
            format=log_format,
            rotation=log_rotation,
            retention=log_retention,
            compression="zip",
            backtrace=True,
            diagnose=True,
            encoding="utf-8"
        )

    logger.debug(
        f"🔧 Логирование настроено: уровень {log_level}, файл {log_file or '-'}, "
        f"ошибки {log_error_file or '-'}, отладка {'включена' if debug else 'выключена'}"
    )


def setup_logging_from_settings() -> None:
    """Настройка логирования из настроек приложения."""
    setup_logging()
