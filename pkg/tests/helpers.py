"""
Вспомогательные построители для тестов.
"""

from app.schemas.experiment import ModelSpec
from app.schemas.geometry import GeometryPreset

# Маленькая апертура: быстрые прямые проходы
SMALL_OVERRIDES = dict(num_layers=2, atoms_per_line=12, layer_distance=5e-6, oversample=2)


def small_spec(**kwargs) -> ModelSpec:
    params = dict(heads=2, message_dim=2, top_k=4, preset=GeometryPreset.SYNTHETIC, geometry_overrides=SMALL_OVERRIDES)
    params.update(kwargs)
    return ModelSpec(**params)
