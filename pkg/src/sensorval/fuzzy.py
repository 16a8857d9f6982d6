"""Type-1 Mamdani fuzzy inference engine.

Fuzzification, rule firing, implication, aggregation over a sampled output
domain, and centroid defuzzification. Systems are immutable after
construction and inference is a pure function of (system, inputs), so a
compiled form of each system is cached and shared freely across threads.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

MF_KINDS = ("gaussian", "triangular", "trapezoidal")
AND_METHODS = ("min", "prod")
OR_METHODS = ("max", "probor")
IMPLICATION_METHODS = ("min", "prod")
AGGREGATION_METHODS = ("max", "sum")
DEFUZZIFICATION_METHODS = ("centroid",)

DEFAULT_RESOLUTION = 101


class ZeroAreaError(ValueError):
    """Centroid of an all-zero aggregated membership is undefined."""


@dataclass(frozen=True)
class MembershipFunction:
    """A parametric membership function over the reals.

    Parameter conventions (matching the `.fis` interchange order):
      gaussian:    (sigma, center), sigma > 0
      triangular:  (a, b, c) with a <= b <= c
      trapezoidal: (a, b, c, d) with a <= b <= c <= d
    """

    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))

    @classmethod
    def gaussian(cls, sigma: float, center: float) -> "MembershipFunction":
        return cls("gaussian", (sigma, center))

    @classmethod
    def triangular(cls, a: float, b: float, c: float) -> "MembershipFunction":
        return cls("triangular", (a, b, c))

    @classmethod
    def trapezoidal(cls, a: float, b: float, c: float, d: float) -> "MembershipFunction":
        return cls("trapezoidal", (a, b, c, d))

    def __call__(self, x):
        """Membership degree in [0, 1]; accepts a scalar or an ndarray."""
        scalar = np.isscalar(x) or (isinstance(x, np.ndarray) and x.ndim == 0)
        xs = np.asarray(x, dtype=float)
        y = _evaluate_mf(self.kind, self.params, np.atleast_1d(xs))
        return float(y[0]) if scalar else y.reshape(xs.shape)


def _evaluate_mf(kind: str, params: tuple[float, ...], x: np.ndarray) -> np.ndarray:
    if kind == "gaussian":
        sigma, center = params
        z = (x - center) / sigma
        return np.exp(-0.5 * z * z)
    if kind == "triangular":
        a, b, c = params
        y = np.zeros_like(x)
        if b > a:
            m = (x > a) & (x < b)
            y[m] = (x[m] - a) / (b - a)
        if c > b:
            m = (x > b) & (x < c)
            y[m] = (c - x[m]) / (c - b)
        y[x == b] = 1.0
        return y
    if kind == "trapezoidal":
        a, b, c, d = params
        y = np.zeros_like(x)
        if b > a:
            m = (x > a) & (x < b)
            y[m] = (x[m] - a) / (b - a)
        if d > c:
            m = (x > c) & (x < d)
            y[m] = (d - x[m]) / (d - c)
        y[(x >= b) & (x <= c)] = 1.0
        return y
    raise ValueError(f"unknown membership function kind: {kind!r}")


def membership(mf: MembershipFunction, x) -> float:
    """Degree of membership of ``x`` in ``mf``."""
    return mf(x)


@dataclass(frozen=True)
class LinguisticVariable:
    """A named variable over a finite range with ordered linguistic terms."""

    name: str
    lo: float
    hi: float
    terms: tuple[tuple[str, MembershipFunction], ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    @property
    def term_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.terms)

    def grid(self, resolution: int) -> np.ndarray:
        """Uniform sample grid over [lo, hi] including both endpoints."""
        return np.linspace(self.lo, self.hi, resolution)

    def fuzzify(self, x):
        """Membership degree of ``x`` in every term, in declaration order.

        ``x`` may lie outside [lo, hi]; memberships are evaluated as-is.
        Scalar input yields a 1-D array (terms,); an (N,) array yields
        (terms, N).
        """
        xs = np.asarray(x, dtype=float)
        scalar = xs.ndim == 0
        degs = np.stack(
            [_evaluate_mf(mf.kind, mf.params, np.atleast_1d(xs)) for _, mf in self.terms]
        )
        return degs[:, 0] if scalar else degs


@dataclass(frozen=True)
class Rule:
    """One fuzzy rule in matrix encoding.

    Antecedent entries are per-input term indices: 0 means "don't care",
    n selects the n-th term (1-based), -n negates it. Consequent entries
    are per-output term indices (0 = no contribution to that output).
    """

    antecedent: tuple[int, ...]
    consequent: tuple[int, ...]
    weight: float = 1.0
    connective: str = "and"

    def __post_init__(self):
        object.__setattr__(self, "antecedent", tuple(int(a) for a in self.antecedent))
        object.__setattr__(self, "consequent", tuple(int(c) for c in self.consequent))


def firing_strength(
    rule: Rule,
    fuzzified: Sequence[np.ndarray],
    and_method: str = "min",
    or_method: str = "max",
) -> float:
    """Degree to which the rule's antecedent holds.

    ``fuzzified`` holds one degree array per input (as from
    ``LinguisticVariable.fuzzify``). Don't-care entries are excluded,
    negated entries contribute 1 - degree, and the combined degree is
    scaled by the rule weight.
    """
    degrees = []
    for entry, termdegs in zip(rule.antecedent, fuzzified):
        if entry == 0:
            continue
        d = float(termdegs[abs(entry) - 1])
        degrees.append(1.0 - d if entry < 0 else d)
    if not degrees:
        raise ValueError("rule has no non-don't-care antecedent entries")
    if rule.connective == "and":
        combined = min(degrees) if and_method == "min" else math.prod(degrees)
    else:
        if or_method == "max":
            combined = max(degrees)
        else:  # probor
            combined = 0.0
            for d in degrees:
                combined = combined + d - combined * d
    return combined * rule.weight


@dataclass(frozen=True)
class FuzzySystem:
    """A complete Mamdani system: variables, rulebase, and operators."""

    name: str
    inputs: tuple[LinguisticVariable, ...]
    outputs: tuple[LinguisticVariable, ...]
    rules: tuple[Rule, ...]
    and_method: str = "min"
    or_method: str = "max"
    implication: str = "min"
    aggregation: str = "max"
    defuzzification: str = "centroid"
    resolution: int = DEFAULT_RESOLUTION

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "rules", tuple(self.rules))

    def infer(self, values: Sequence[float]) -> "InferenceResult":
        return infer(self, values)

    def infer_batch(self, points: np.ndarray) -> "BatchInference":
        return infer_batch(self, points)


@dataclass(frozen=True)
class AggregatedOutput:
    """Aggregated output membership sampled on a uniform grid over [lo, hi]."""

    lo: float
    hi: float
    samples: np.ndarray


@dataclass(frozen=True)
class InferenceResult:
    """Crisp outputs plus evidence flags for one inference."""

    values: tuple[float, ...]
    no_rule_fired: bool
    out_of_range: bool


@dataclass(frozen=True)
class BatchInference:
    """Vectorized inference over N input points."""

    values: np.ndarray        # (N, n_outputs)
    no_rule_fired: np.ndarray  # (N,) bool
    out_of_range: np.ndarray   # (N,) bool


class _Compiled:
    """Precomputed arrays for fast repeated inference on one system."""

    def __init__(self, system: FuzzySystem):
        self.system = system
        self.in_lo = np.array([v.lo for v in system.inputs])
        self.in_hi = np.array([v.hi for v in system.inputs])
        res = system.resolution
        self.grids = [v.grid(res) for v in system.outputs]
        # (terms, res) membership of each output term on its grid
        self.term_grids = [
            np.stack([_evaluate_mf(mf.kind, mf.params, g) for _, mf in v.terms])
            for v, g in zip(system.outputs, self.grids)
        ]
        self.midpoints = np.array([(v.lo + v.hi) / 2.0 for v in system.outputs])
        self.ante = np.array([r.antecedent for r in system.rules])      # (R, n_in)
        self.cons = np.array([r.consequent for r in system.rules])      # (R, n_out)
        self.weights = np.array([r.weight for r in system.rules])
        self.is_or = np.array([r.connective == "or" for r in system.rules])


@functools.lru_cache(maxsize=64)
def _compiled(system: FuzzySystem) -> _Compiled:
    return _Compiled(system)


def _batch_strengths(comp: _Compiled, degrees: list[np.ndarray]) -> np.ndarray:
    """Firing strength of every rule at every point: (R, N)."""
    sys = comp.system
    n = degrees[0].shape[1]
    strengths = np.empty((len(sys.rules), n))
    for r in range(len(sys.rules)):
        combined = None
        for i in range(len(sys.inputs)):
            entry = comp.ante[r, i]
            if entry == 0:
                continue
            d = degrees[i][abs(entry) - 1]
            if entry < 0:
                d = 1.0 - d
            if combined is None:
                combined = d.copy()
            elif comp.is_or[r]:
                if sys.or_method == "max":
                    np.maximum(combined, d, out=combined)
                else:
                    combined += d - combined * d
            else:
                if sys.and_method == "min":
                    np.minimum(combined, d, out=combined)
                else:
                    combined *= d
        strengths[r] = combined * comp.weights[r]
    return strengths


def infer_batch(system: FuzzySystem, points: np.ndarray) -> BatchInference:
    """Run the full Mamdani pipeline at each row of ``points``.

    Inputs outside a variable's declared range are clamped first and the
    point is flagged ``out_of_range``. An output whose aggregated
    membership is identically zero falls back to the range midpoint and
    flags ``no_rule_fired``.
    """
    comp = _compiled(system)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != len(system.inputs):
        raise ValueError(
            f"expected {len(system.inputs)} inputs per point, got {pts.shape[1]}"
        )
    clamped = np.clip(pts, comp.in_lo, comp.in_hi)
    out_of_range = np.any(clamped != pts, axis=1)

    degrees = [var.fuzzify(clamped[:, i]) for i, var in enumerate(system.inputs)]
    strengths = _batch_strengths(comp, degrees)

    n = pts.shape[0]
    values = np.empty((n, len(system.outputs)))
    no_rule = np.zeros(n, dtype=bool)
    for o in range(len(system.outputs)):
        grid = comp.grids[o]
        tgrids = comp.term_grids[o]
        agg = np.zeros((n, grid.size))
        if system.aggregation == "max":
            # Rules sharing a consequent term can be collapsed first:
            # max_r impl(s_r, g) == impl(max_r s_r, g) for min and prod.
            for t in range(tgrids.shape[0]):
                sel_pos = np.flatnonzero(comp.cons[:, o] == t + 1)
                if sel_pos.size == 0:
                    continue
                s = strengths[sel_pos[0]]
                for r in sel_pos[1:]:
                    s = np.maximum(s, strengths[r])
                if system.implication == "min":
                    np.maximum(agg, np.minimum(s[:, None], tgrids[t][None, :]), out=agg)
                else:
                    np.maximum(agg, s[:, None] * tgrids[t][None, :], out=agg)
        else:  # sum, clipped at 1
            for r in range(len(system.rules)):
                t = comp.cons[r, o]
                if t == 0:
                    continue
                if system.implication == "min":
                    agg += np.minimum(strengths[r][:, None], tgrids[t - 1][None, :])
                else:
                    agg += strengths[r][:, None] * tgrids[t - 1][None, :]
            np.clip(agg, 0.0, 1.0, out=agg)
        area = agg.sum(axis=1)
        dead = area == 0.0
        no_rule |= dead
        safe = np.where(dead, 1.0, area)
        values[:, o] = np.where(dead, comp.midpoints[o], (agg @ grid) / safe)
    return BatchInference(values=values, no_rule_fired=no_rule, out_of_range=out_of_range)


def infer(system: FuzzySystem, values: Sequence[float]) -> InferenceResult:
    """Single-point inference; same arithmetic as the batch path."""
    res = infer_batch(system, np.asarray(values, dtype=float)[None, :])
    return InferenceResult(
        values=tuple(float(v) for v in res.values[0]),
        no_rule_fired=bool(res.no_rule_fired[0]),
        out_of_range=bool(res.out_of_range[0]),
    )


def defuzzify_centroid(agg: AggregatedOutput) -> float:
    """Center of gravity of the sampled membership over its uniform grid."""
    samples = np.asarray(agg.samples, dtype=float)
    total = samples.sum()
    if total <= 0.0:
        raise ZeroAreaError("aggregated membership is identically zero")
    grid = np.linspace(agg.lo, agg.hi, samples.size)
    return float((samples @ grid) / total)


def control_surface(
    system: FuzzySystem,
    axis_i: int,
    axis_j: int,
    fixed: Mapping[int, float],
    grid: tuple[int, int] = (50, 50),
    output: int = 0,
) -> np.ndarray:
    """Crisp output over a uniform 2-D slice of the input space.

    ``fixed`` maps each non-axis input index to its held value. Cells
    where no rule fired are recorded as NaN rather than aborting the
    surface. Returns an (n_i, n_j) matrix.
    """
    if axis_i == axis_j:
        raise ValueError("axis_i and axis_j must differ")
    ni, nj = grid
    if ni < 2 or nj < 2:
        raise ValueError("grid dimensions must be at least 2")
    n_in = len(system.inputs)
    rest = [k for k in range(n_in) if k not in (axis_i, axis_j)]
    missing = [k for k in rest if k not in fixed]
    if missing:
        raise ValueError(f"fixed is missing values for inputs {missing}")
    xi = system.inputs[axis_i].grid(ni)
    xj = system.inputs[axis_j].grid(nj)
    pts = np.zeros((ni * nj, n_in))
    for k in rest:
        pts[:, k] = fixed[k]
    mi, mj = np.meshgrid(xi, xj, indexing="ij")
    pts[:, axis_i] = mi.ravel()
    pts[:, axis_j] = mj.ravel()
    res = infer_batch(system, pts)
    surf = res.values[:, output].copy()
    surf[res.no_rule_fired] = np.nan
    return surf.reshape(ni, nj)
