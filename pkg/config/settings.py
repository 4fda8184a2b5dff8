"""
Конфигурация для DGNN - симулятора дифракционных графовых нейросетей.
"""

from pathlib import Path
from typing import List
from pydantic import Field
from pydantic_settings import BaseSettings

class Settings(BaseSettings):
    """Настройки приложения для DGNN."""

    # Основные настройки
    APP_NAME: str = "DGNN - дифракционные графовые нейросети"
    APP_DESCRIPTION: str = "Симулятор и тренер фотонных графовых нейросетей на металиниях"

    # Физика DPU
    WAVELENGTH: float = Field(default=1.55e-6, env="WAVELENGTH")  # вакуумная длина волны, м
    EFFECTIVE_INDEX: float = Field(default=2.85, env="EFFECTIVE_INDEX")  # TE-мода слэба SOI 220 нм
    ATOM_PITCH: float = Field(default=300e-9, env="ATOM_PITCH")
    MODE_HALFWIDTH: float = Field(default=0.5e-6, env="MODE_HALFWIDTH")  # полуширина гауссовой моды по уровню 1/e
    OVERSAMPLE: int = Field(default=4, env="OVERSAMPLE")
    PAD_FACTOR: int = Field(default=2, env="PAD_FACTOR")
    GROUP_SIZE: int = Field(default=3, env="GROUP_SIZE")
    LUT_FILE: str = Field(default="", env="LUT_FILE")  # пусто = линейная LUT по умолчанию

    # Настройки графов
    PPR_ALPHA: float = Field(default=0.25, env="PPR_ALPHA")
    TOP_K: int = Field(default=8, env="TOP_K")
    PCA_DIM: int = Field(default=20, env="PCA_DIM")
    BENCHMARK_TEST_SIZE: int = Field(default=1000, env="BENCHMARK_TEST_SIZE")
    PPR_BLOCK_SIZE: int = Field(default=2048, env="PPR_BLOCK_SIZE")

    # Настройки обучения DGNN
    EPOCHS: int = Field(default=3000, env="EPOCHS")
    LR_DGNN_O: float = Field(default=0.1, env="LR_DGNN_O")
    LR_DGNN_E: float = Field(default=0.01, env="LR_DGNN_E")
    LR_ACTION: float = Field(default=0.005, env="LR_ACTION")
    LR_RETRAIN: float = Field(default=0.1, env="LR_RETRAIN")
    ACTION_BATCH_SIZE: int = Field(default=32, env="ACTION_BATCH_SIZE")
    ACTION_WINDOW: int = Field(default=6, env="ACTION_WINDOW")

    # Настройки электронных моделей
    BASELINE_LR: float = Field(default=0.01, env="BASELINE_LR")
    BASELINE_EPOCHS: int = Field(default=10000, env="BASELINE_EPOCHS")
    BASELINE_HIDDEN: int = Field(default=8, env="BASELINE_HIDDEN")
    BASELINE_WEIGHT_DECAYS: str = Field(default="0.0001,0.0005,0.001,0.005", env="BASELINE_WEIGHT_DECAYS")

    @property
    def weight_decays_list(self) -> List[float]:
        """Получить сетку коэффициентов L2-регуляризации."""
        return [float(x.strip()) for x in self.BASELINE_WEIGHT_DECAYS.split(",") if x.strip()]

    # Вычислительные характеристики
    MODULATION_RATE_HZ: float = Field(default=1e11, env="MODULATION_RATE_HZ")
    SOURCE_POWER_W: float = Field(default=10e-3, env="SOURCE_POWER_W")

    # Реестр запусков
    DATABASE_URL: str = Field(default="sqlite:///./dgnn_runs.db", env="DATABASE_URL")
    REGISTRY_ENABLED: bool = Field(default=True, env="REGISTRY_ENABLED")
    REPORTS_DIR: str = Field(default="reports", env="REPORTS_DIR")

    # Настройки логирования
    LOG_LEVEL: str = Field(default="INFO", env="LOG_LEVEL")
    LOG_FILE: str = Field(default="logs/dgnn.log", env="LOG_FILE")
    LOG_ERROR_FILE: str = Field(default="logs/dgnn_errors.log", env="LOG_ERROR_FILE")
    LOG_FORMAT: str = Field(default="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}", env="LOG_FORMAT")
    LOG_ROTATION: str = Field(default="1 day", env="LOG_ROTATION")
    LOG_RETENTION: str = Field(default="30 days", env="LOG_RETENTION")

    # Настройки разработки
    DEBUG: bool = Field(default=False, env="DEBUG")
    ECHO_SQL: bool = Field(default=False, env="ECHO_SQL")

    class Config:
        env_file = Path(__file__).parent.parent / ".env"
        env_file_encoding = "utf-8"
        case_sensitive = True
        extra = "ignore"

# Создаем глобальный экземпляр настроек
settings = Settings()

def get_settings() -> Settings:
    """Получить настройки приложения."""
    # Всегда создаем новый экземпляр для получения актуальных данных
    return Settings()
