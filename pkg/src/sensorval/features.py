"""Crisp feature extraction for the fuzzy confidence score.

Each reading is summarized by three features before fuzzification: the
raw value itself (distance), the absolute rate of change against the
previous validated reading, and the standard deviation of the recent
window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .detectors import Window


class ZeroIntervalError(ValueError):
    """Rate of change over a zero time interval is undefined."""


@dataclass(frozen=True)
class Sample:
    """One timestamped reading from one sensor."""

    timestamp: float
    value: float
    sensor_id: str = ""


@dataclass(frozen=True)
class CrispInputs:
    """Fuzzifier inputs in the order the confidence system declares them."""

    distance: float
    roc: float
    std_dev: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.distance, self.roc, self.std_dev)


def rate_of_change(prev: Sample, curr: Sample) -> float:
    """Absolute change per unit time between consecutive samples.

    Raises ZeroIntervalError when the timestamps coincide and
    ValueError when they run backwards.
    """
    dt = curr.timestamp - prev.timestamp
    if dt == 0.0:
        raise ZeroIntervalError(f"samples share timestamp {curr.timestamp}")
    if dt < 0.0:
        raise ValueError(
            f"non-monotonic timestamps: {prev.timestamp} then {curr.timestamp}"
        )
    return abs(curr.value - prev.value) / dt


def extract(window: Window, prev: Sample | None, curr: Sample) -> CrispInputs:
    """Features for ``curr``, whose value is already in ``window``.

    With no previous sample the rate of change is 0; with fewer than two
    window entries the standard deviation is 0.
    """
    roc = rate_of_change(prev, curr) if prev is not None else 0.0
    std = math.sqrt(window.variance()) if len(window) >= 2 else 0.0
    return CrispInputs(distance=curr.value, roc=roc, std_dev=std)
