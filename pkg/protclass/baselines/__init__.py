"""
Classical post-hoc calibrators used as comparison baselines.

Each calibrator class has fit(probs, labels) and transform(probs) over (n, K) probability arrays.
"""

from protclass.baselines.isotonic import IsotonicCalibrator, IsotonicModel, apply_isotonic, fit_isotonic, pav
from protclass.baselines.platt import PlattCalibrator, PlattModel, fit_platt
from protclass.baselines.temperature import TemperatureCalibrator, TemperatureModel, fit_temperature
from protclass.errors import ConfigError
from protclass.streams import DEFAULT_CLAMP_EPSILON

BASELINES = {
    PlattCalibrator.name: PlattCalibrator,
    TemperatureCalibrator.name: TemperatureCalibrator,
    IsotonicCalibrator.name: IsotonicCalibrator,
}


def make_baseline(name: str, clamp_epsilon: float = DEFAULT_CLAMP_EPSILON):
    """Unfitted calibrator by name: "platt", "temperature" or "isotonic"."""
    try:
        return BASELINES[name](clamp_epsilon=clamp_epsilon)
    except KeyError:
        raise ConfigError(f"unknown baseline {name!r}; choose from {sorted(BASELINES)}") from None


__all__ = [
    "BASELINES",
    "IsotonicCalibrator",
    "IsotonicModel",
    "PlattCalibrator",
    "PlattModel",
    "TemperatureCalibrator",
    "TemperatureModel",
    "apply_isotonic",
    "fit_isotonic",
    "fit_platt",
    "fit_temperature",
    "make_baseline",
    "pav",
]
