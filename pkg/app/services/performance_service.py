"""
Сервис расчета вычислительных характеристик DGNN.

Скорость, энергоэффективность и плотность вычислений по числу операций за такт.
"""

from dataclasses import asdict, dataclass
from typing import Dict, Optional

from loguru import logger

from app.core.exceptions import DomainException

M2_TO_MM2 = 1e6


@dataclass(frozen=True)
class PerformanceReport:
    """Операций за такт, в секунду, на джоуль и на мм^2 (если задана площадь)."""

    ops_per_cycle: int
    ops_per_s: float
    ops_per_joule: float
    ops_per_s_per_mm2: Optional[float]

    def as_dict(self) -> Dict[str, Optional[float]]:
        return asdict(self)


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if value is None or value <= 0:
            raise DomainException(f"{name} должно быть больше нуля, получено {value}")


def compute_performance(
    n: int,
    m: int,
    k: int,
    heads: int,
    n_classes: int,
    mod_rate_hz: float,
    source_power_w: float,
    area_m2: Optional[float] = None
) -> PerformanceReport:
    """
    Операций за такт (n*k + k + C) * m * P и производные величины.

    Args:
        n: Размерность атрибутов узла
        m: Выходов DPU
        k: Соседей в агрегации
        heads: Количество голов P
        n_classes: Количество классов C
        mod_rate_hz: Частота модуляции
        source_power_w: Мощность источника
        area_m2: Площадь кристалла (для плотности)

    Returns:
        PerformanceReport: Характеристики
    """
    _require_positive(n=n, m=m, k=k, heads=heads, n_classes=n_classes)
    _require_positive(mod_rate_hz=mod_rate_hz, source_power_w=source_power_w)
    if area_m2 is not None:
        _require_positive(area_m2=area_m2)

    ops_per_cycle = (n * k + k + n_classes) * m * heads
    ops_per_s = ops_per_cycle * mod_rate_hz
    report = PerformanceReport(
        ops_per_cycle=ops_per_cycle,
        ops_per_s=ops_per_s,
        ops_per_joule=ops_per_s / source_power_w,
        ops_per_s_per_mm2=ops_per_s / (area_m2 * M2_TO_MM2) if area_m2 is not None else None,
    )
    logger.info(f"⚡ {ops_per_cycle} операций за такт, {ops_per_s / 1e12:.1f} TOPs/s")
    return report


def map_density(n_in: int, n_out: int, mod_rate_hz: float, area_m2: float) -> float:
    """
    Плотность вычислений одного DPU, выполняющего отображение n_in -> n_out, ops/s/mm^2.

    Args:
        n_in: Входов
        n_out: Выходов
        mod_rate_hz: Частота модуляции
        area_m2: Площадь DPU

    Returns:
        float: Операций в секунду на мм^2
    """
    _require_positive(n_in=n_in, n_out=n_out, mod_rate_hz=mod_rate_hz, area_m2=area_m2)
    return n_in * n_out * mod_rate_hz / (area_m2 * M2_TO_MM2)
