"""
Пользовательские исключения приложения.

Содержит все исключения, используемые в симуляторе DGNN.
"""

from typing import Optional


class DgnnException(Exception):
    """Базовое исключение приложения."""

    def __init__(self, message: str = "Произошла ошибка"):
        self.message = message
        super().__init__(self.message)


class DomainException(DgnnException):
    """Значение вне допустимой математической или физической области."""
    pass


class ShapeException(DgnnException):
    """Несовпадение размерностей массивов."""
    pass


class NumericException(DgnnException):
    """Нечисловые промежуточные значения или вырожденная система."""

    def __init__(self, message: str = "Численная ошибка", provenance: Optional[str] = None):
        self.provenance = provenance
        if provenance:
            message = f"{message} [{provenance}]"
        super().__init__(message)


class DivergenceException(DgnnException):
    """Расходимость обучения (loss стал NaN/inf)."""

    def __init__(self, epoch: int, last_finite_loss: Optional[float] = None, message: str = ""):
        self.epoch = epoch
        self.last_finite_loss = last_finite_loss
        super().__init__(
            message or f"Обучение разошлось на эпохе {epoch}, последний конечный loss: {last_finite_loss}"
        )


class FormatException(DgnnException):
    """Ошибка формата файла."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = f"{path}:{line}" if path is not None and line is not None else (path or "")
        super().__init__(f"{location}: {message}" if location else message)


class NodeIdException(FormatException):
    """Идентификатор узла вне диапазона."""
    pass


class VersionException(DgnnException):
    """Неподдерживаемая версия формата."""
    pass


class HashMismatchException(DgnnException):
    """Контрольная сумма чекпойнта не совпадает."""
    pass


class ConfigurationException(DgnnException):
    """Исключение для ошибок конфигурации."""
    pass


class PipelineException(DgnnException):
    """Ошибка этапа эксперимента с указанием этапа."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"Этап '{stage}': {cause}")
