"""
Электронные модели сравнения.
"""

from .models import LinearClassifier, MlpModel, PprGoModel, PprGoVariant

__all__ = ["LinearClassifier", "MlpModel", "PprGoModel", "PprGoVariant"]
