"""The shipped confidence rulebase.

The default system scores ultrasonic fill-level readings. Inputs are the
raw distance (cm), the absolute rate of change against the validated
history (cm/s), and the windowed standard deviation of validated values
(cm). Output is a confidence on [0, 1].

The surface must never reward worse dynamics, so the two dynamics
inputs use triangular terms that sum to one everywhere: gaussian covers
sag between term centers under max aggregation, and the recovering
Medium hump re-inflates the centroid (a measurable rise of ~5e-3).
The Medium rules are guarded with NOT High rather than enumerating
cells for the same reason. Distance and the output keep gaussian
terms. ``sensorval/data/confidence.fis`` is this system serialized; a
byte-for-byte regression test keeps the two in sync.
"""

from __future__ import annotations

from .fuzzy import FuzzySystem, LinguisticVariable, MembershipFunction, Rule

__all__ = ["default_system"]


def _partition(lo: float, hi: float) -> tuple[tuple[str, MembershipFunction], ...]:
    """Three triangular terms forming a partition of unity on [lo, hi]."""
    mid = (lo + hi) / 2.0
    half = (hi - lo) / 2.0
    return (
        ("Low", MembershipFunction.triangular(lo - half, lo, mid)),
        ("Medium", MembershipFunction.triangular(lo, mid, hi)),
        ("High", MembershipFunction.triangular(mid, hi, hi + half)),
    )


def default_system() -> FuzzySystem:
    """Build the shipped Mamdani confidence system."""
    distance = LinguisticVariable(
        "distance",
        0.0,
        400.0,
        (
            ("Near", MembershipFunction.gaussian(25.0, 0.0)),
            ("Mid", MembershipFunction.gaussian(80.0, 200.0)),
            ("Far", MembershipFunction.gaussian(25.0, 400.0)),
        ),
    )
    roc = LinguisticVariable("rate_of_change", 0.0, 16.0, _partition(0.0, 16.0))
    std = LinguisticVariable("std_dev", 0.0, 16.0, _partition(0.0, 16.0))
    confidence = LinguisticVariable(
        "confidence",
        0.0,
        1.0,
        (
            ("Low", MembershipFunction.gaussian(0.15, 0.0)),
            ("Medium", MembershipFunction.gaussian(0.15, 0.5)),
            ("High", MembershipFunction.gaussian(0.15, 1.0)),
        ),
    )

    rules = (
        # any saturated dynamics feature kills confidence outright
        Rule((0, 3, 3), (1,), 1.0, "or"),
        # fully calm signal in the trusted middle of the range
        Rule((2, 1, 1), (3,), 1.0, "and"),
        # one feature stirring (but neither saturated) is worth Medium
        Rule((0, 2, -3), (2,), 1.0, "and"),
        Rule((0, -3, 2), (2,), 1.0, "and"),
        # range extremes alone cost one level even when calm
        Rule((1, 1, 1), (2,), 1.0, "and"),
        Rule((3, 1, 1), (2,), 1.0, "and"),
    )

    return FuzzySystem(
        name="confidence",
        inputs=(distance, roc, std),
        outputs=(confidence,),
        rules=rules,
    )
