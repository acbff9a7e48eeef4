"""Degree-distribution domain model for erasure-code ensembles.

Holds node/edge-perspective distributions, the tilting (graph-reduction)
transforms between ARA/NSIRA/ALDPC pairs and their equivalent LDPC pairs, the
matching operator T, membership tests for the d.d. set, and the bit/check
symmetry swap.

Distributions carry their truncated coefficient series and, when a
construction knows one, a closed-form pointwise evaluator plus the exact value
of the integral over [0,1]. The evaluator is what density evolution and the
residual checks use: for the heavy-tailed check distributions the truncated
series alone cannot reach the required tolerances near x = 1.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .series import (
    PowerSeries,
    coefficients_from_inverse,
    invert_increasing,
)

log = logging.getLogger(__name__)

# Coefficients in (NEG_CLAMP, 0) are treated as cancellation noise and zeroed.
NEG_CLAMP = -1e-11


class NotMonotone(ValueError):
    """Operator precondition: the distribution must be strictly increasing."""


class SeriesInstability(ArithmeticError):
    """Series-mode result failed validation against the numeric evaluator."""


class Perspective(str, Enum):
    NODE = "node"
    EDGE = "edge"


class Side(str, Enum):
    BIT = "bit"
    CHECK = "check"


class Family(str, Enum):
    LDPC = "ldpc"
    ARA = "ara"
    NSIRA = "nsira"
    ALDPC = "aldpc"


@dataclass
class DegreeDist:
    """A degree distribution: truncated series plus optional analytic form.

    ``analytic`` is a pointwise evaluator valid on [0,1] (and accepting complex
    arguments for the circle-extraction paths); ``exact_integral`` is the exact
    integral of the function over [0,1] where a closed form exists.
    """

    series: PowerSeries
    perspective: Perspective
    side: Side
    analytic: Optional[Callable] = None
    exact_integral: Optional[float] = None
    clamped: bool = field(default=False)

    def __post_init__(self):
        c = self.series.coeffs
        tiny = (c < 0) & (c > NEG_CLAMP)
        if tiny.any():
            c = c.copy()
            c[tiny] = 0.0
            self.series = PowerSeries(c)
            self.clamped = True
            log.debug("clamped %d coefficient(s) in (-1e-11, 0)", int(tiny.sum()))

    @property
    def precision(self) -> int:
        return self.series.precision

    @property
    def coeffs(self) -> np.ndarray:
        return self.series.coeffs

    def __call__(self, x):
        if self.analytic is not None:
            return self.analytic(x)
        return self.series(x)

    def eval_series(self, x):
        return self.series(x)

    def integral01(self) -> float:
        if self.exact_integral is not None:
            return self.exact_integral
        return self.series.integral01()

    def mean_degree(self) -> float:
        """f'(1) for node perspective; 1/integral for edge perspective."""
        if self.perspective is Perspective.EDGE:
            return 1.0 / self.integral01()
        return float(np.dot(np.arange(self.precision), self.coeffs))


@dataclass
class NegativityReport:
    """Where a power-series expansion first leaves the nonnegative cone."""

    first_negative_index: Optional[int]
    min_coefficient: float
    negative_count: int

    @property
    def nonnegative(self) -> bool:
        return self.first_negative_index is None

    @classmethod
    def scan(cls, coeffs: np.ndarray, tol: float = NEG_CLAMP) -> "NegativityReport":
        bad = np.where(coeffs < tol)[0]
        first = int(bad[0]) if len(bad) else None
        return cls(first, float(coeffs.min(initial=0.0)), int(len(bad)))


@dataclass
class MembershipReport:
    """Outcome of the d.d.-set membership test (nonneg, f(0)=0, f(1)=1)."""

    negativity: NegativityReport
    zero_at_zero: bool
    constant_term: float
    sum_at_one: float
    normalized: bool

    @property
    def ok(self) -> bool:
        return self.negativity.nonnegative and self.zero_at_zero and self.normalized

    def violations(self) -> list[str]:
        out = []
        if not self.negativity.nonnegative:
            out.append(
                f"negative coefficient at index {self.negativity.first_negative_index}"
                f" (min {self.negativity.min_coefficient:.3e})"
            )
        if not self.zero_at_zero:
            out.append(f"f(0) = {self.constant_term:.3e} != 0")
        if not self.normalized:
            out.append(f"f(1) = {self.sum_at_one:.9f} != 1")
        return out


@dataclass
class DegreeDistPair:
    """An (edge-bit, edge-check) distribution pair tagged with family and p."""

    bit: DegreeDist
    check: DegreeDist
    family: Family
    p: float
    bit_node: Optional[DegreeDist] = None
    check_node: Optional[DegreeDist] = None

    def __post_init__(self):
        if self.bit.side is not Side.BIT or self.check.side is not Side.CHECK:
            raise ValueError("pair sides must be (bit, check)")
        if self.bit.perspective is not Perspective.EDGE or self.check.perspective is not Perspective.EDGE:
            raise ValueError("pair must hold edge-perspective distributions")
        hi = 1.0 if self.family is Family.LDPC else 1.0 - 1e-12
        if not 0.0 < self.p <= hi:
            raise ValueError(f"p={self.p} outside the valid range for {self.family.value}")

    def node_bit(self) -> DegreeDist:
        if self.bit_node is None:
            self.bit_node = node_from_edge(self.bit)
        return self.bit_node

    def node_check(self) -> DegreeDist:
        if self.check_node is None:
            self.check_node = node_from_edge(self.check)
        return self.check_node


# -- node/edge conversions --------------------------------------------------


def edge_from_node(dist: DegreeDist) -> DegreeDist:
    """Edge-perspective distribution f'(x)/f'(1) of a node distribution."""
    if dist.perspective is not Perspective.NODE:
        raise ValueError("edge_from_node expects a node-perspective distribution")
    return DegreeDist(dist.series.differentiate_normalized(), Perspective.EDGE, dist.side)


def node_from_edge(dist: DegreeDist) -> DegreeDist:
    """Node-perspective distribution: normalized integral of an edge one."""
    if dist.perspective is not Perspective.EDGE:
        raise ValueError("node_from_edge expects an edge-perspective distribution")
    series = dist.series.integrate_normalized()
    return DegreeDist(series, Perspective.NODE, dist.side)


# -- tilting (graph reduction) ------------------------------------------------


def tilt_node(dist: DegreeDist, p: float, side: Side | None = None) -> DegreeDist:
    """Graph-reduction transform of a node distribution.

    Check side: (1-p) R / (1 - p R); bit side: p L / (1 - (1-p) L). Both keep
    the value 1 at x = 1.
    """
    if dist.perspective is not Perspective.NODE:
        raise ValueError("tilt_node expects a node-perspective distribution")
    side = side or dist.side
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0,1)")
    num_w, den_w = ((p, 1.0 - p) if side is Side.BIT else (1.0 - p, p))
    f = dist.series
    den = PowerSeries(_unit(f.precision) - den_w * f.coeffs)
    tilted = f.scale(num_w).div(den)
    analytic = None
    if dist.analytic is not None:
        base = dist.analytic
        analytic = lambda x, _b=base, _n=num_w, _d=den_w: _n * _b(x) / (1 - _d * _b(x))
    return DegreeDist(tilted, Perspective.NODE, side, analytic=analytic)


def untilt_node(dist: DegreeDist, p: float, side: Side | None = None):
    """Inverse of tilt_node: L = Lt/(p + (1-p)Lt), R = Rt/(1-p + p Rt).

    Returns (distribution, NegativityReport); negative coefficients beyond the
    clamp tolerance are reported, never raised — the caller decides.
    """
    if dist.perspective is not Perspective.NODE:
        raise ValueError("untilt_node expects a node-perspective distribution")
    side = side or dist.side
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0,1)")
    const, slope = ((p, 1.0 - p) if side is Side.BIT else (1.0 - p, p))
    f = dist.series
    den = PowerSeries(slope * f.coeffs + const * _unit(f.precision))
    raw = f.div(den)
    report = NegativityReport.scan(raw.coeffs)
    analytic = None
    if dist.analytic is not None:
        base = dist.analytic
        analytic = lambda x, _b=base, _c=const, _s=slope: _b(x) / (_c + _s * _b(x))
    out = DegreeDist(raw, Perspective.NODE, side, analytic=analytic)
    return out, report


def tilt_edge_dist(dist: DegreeDist, node: DegreeDist, q: float) -> DegreeDist:
    """Edge-perspective tilt with parameter q: (1-q)^2 f / (1 - q F)^2.

    ``node`` is the matching node-perspective distribution F. The exact
    integral transforms as (1-q) times the original integral.
    """
    f, F = dist.series, node.series
    n = min(f.precision, F.precision)
    den = PowerSeries(_unit(n) - q * F.coeffs[:n])
    den2 = den * den
    tilted = f.truncate(n).scale((1.0 - q) ** 2).div(den2)
    analytic = None
    if dist.analytic is not None and node.analytic is not None:
        fe, Fe = dist.analytic, node.analytic
        analytic = lambda x, _f=fe, _F=Fe, _q=q: (1 - _q) ** 2 * _f(x) / (1 - _q * _F(x)) ** 2
    exact = None
    if dist.exact_integral is not None:
        exact = (1.0 - q) * dist.exact_integral
    return DegreeDist(tilted, Perspective.EDGE, dist.side, analytic=analytic,
                      exact_integral=exact)


def tilt_edge(pair: DegreeDistPair) -> DegreeDistPair:
    """Reduce an ARA/NSIRA/ALDPC pair to its equivalent LDPC pair.

    ARA tilts both sides (bit with parameter 1-p, check with p); NSIRA only the
    check side; ALDPC only the bit side. The result is tagged LDPC with p = 1:
    after reduction every remaining node sees a fully erased channel.
    """
    p = pair.p
    if pair.family is Family.ARA:
        bit = tilt_edge_dist(pair.bit, pair.node_bit(), 1.0 - p)
        check = tilt_edge_dist(pair.check, pair.node_check(), p)
    elif pair.family is Family.NSIRA:
        bit = pair.bit
        check = tilt_edge_dist(pair.check, pair.node_check(), p)
    elif pair.family is Family.ALDPC:
        bit = tilt_edge_dist(pair.bit, pair.node_bit(), 1.0 - p)
        check = pair.check
    else:
        raise ValueError("tilt_edge expects an ARA, NSIRA or ALDPC pair")
    return DegreeDistPair(bit, check, Family.LDPC, 1.0)


# -- matching operator T ------------------------------------------------------


def _check_monotone(dist: DegreeDist, grid_points: int = 1024, tol: float = 1e-12):
    xs = np.linspace(0.0, 1.0, grid_points)
    try:
        vals = np.asarray(dist(xs), dtype=float)
    except TypeError:
        vals = np.array([float(dist(float(x))) for x in xs])
    if np.any(np.diff(vals) < -tol) or vals[-1] <= vals[0]:
        raise NotMonotone("distribution is not strictly increasing on [0,1]")
    return vals


def t_operator_numeric(dist: DegreeDist, tol: float = 1e-13) -> Callable[[float], float]:
    """Pointwise evaluator of Tf(x) = 1 - f^{-1}(1-x), by bisection."""
    _check_monotone(dist)

    def tf(x: float) -> float:
        return 1.0 - invert_increasing(lambda t: float(np.real(dist(t))), 1.0 - x, tol=tol)

    return tf


def t_operator_series(dist: DegreeDist, precision: int | None = None,
                      validate: bool = True) -> DegreeDist:
    """Truncated series of Tf.

    With an analytic evaluator present, coefficients come from inversion on a
    complex circle (robust for every constructed family). Otherwise the map
    1 - f(1-t) is re-expanded by an exact polynomial shift and reverted, which
    is reliable only for mild inputs; the result is validated pointwise against
    the numeric operator and SeriesInstability is raised on disagreement.
    """
    _check_monotone(dist)
    n = precision or dist.precision
    if dist.analytic is not None:
        fwd = lambda w, _f=dist.analytic: 1.0 - _f(1.0 - w)
        eps = 1e-7
        fpr = lambda w, _g=fwd: (_g(w + eps) - _g(w - eps)) / (2 * eps)
        coeffs = coefficients_from_inverse(fwd, fpr, n)
    else:
        coeffs = _t_series_by_reversion(dist.series, n)
    out = DegreeDist(PowerSeries(coeffs), dist.perspective, dist.side)
    if validate:
        tf = t_operator_numeric(dist)
        xs = np.arange(0.1, 0.95, 0.1)
        err = max(abs(float(out.series(float(x))) - tf(float(x))) for x in xs)
        if err > 1e-7:
            raise SeriesInstability(
                f"series-mode T disagrees with numeric mode by {err:.2e}; "
                "use the numeric operator for this input"
            )
    return out


def t_operator(dist: DegreeDist, mode: str = "series", **kwargs):
    if mode == "numeric":
        return t_operator_numeric(dist, **kwargs)
    if mode == "series":
        return t_operator_series(dist, **kwargs)
    raise ValueError(f"unknown mode {mode!r}")


def _t_series_by_reversion(series: PowerSeries, n: int) -> np.ndarray:
    c = series.coeffs
    # domain rescale t -> alpha*t keeps the shifted map's coefficients bounded
    alpha = min(1.0, 0.95 * _shift_radius(c))
    shifted = _shift_one_minus(c, alpha, n)
    h = -shifted
    h[0] += 1.0
    # h(0) = 1 - f(1) is a pure truncation deficit for a normalized d.d.
    if abs(h[0]) < 1e-6:
        h[0] = 0.0
    g = PowerSeries(h).reversion()
    return alpha * g.coeffs


def _shift_radius(c: np.ndarray) -> float:
    """Distance from 0 to the nearest singularity of f(1-t), from tail decay."""
    nz = np.where(np.abs(c) > 1e-13)[0]
    if len(nz) == 0 or nz[-1] < len(c) - 8:
        return np.inf  # polynomial: shift is exact at any scale
    tail = np.abs(c[-17:-1])
    ratios = tail[1:] / np.maximum(tail[:-1], 1e-300)
    beta = float(np.median(ratios))
    if beta <= 0 or beta >= 1:
        return 0.05
    return max(1.0 / beta - 1.0, 1e-3)


def _shift_one_minus(c: np.ndarray, alpha: float, n: int) -> np.ndarray:
    """Coefficients of f(1 - alpha*s) via Horner on the linear substitution."""
    out = np.zeros(n)
    out[0] = c[-1]
    lin = np.zeros(2)
    lin[0], lin[1] = 1.0, -alpha
    for k in range(len(c) - 2, -1, -1):
        out = np.convolve(out, lin)[:n]
        out[0] += c[k]
    return out


# -- membership ----------------------------------------------------------------


def is_in_P(dist: DegreeDist, neg_tol: float = NEG_CLAMP,
            sum_tol: float = 1e-6) -> MembershipReport:
    """Membership in the d.d. set: nonneg coefficients, f(0)=0, f(1)=1.

    The normalization check is truncation-aware: slowly decaying positive
    tails get an allowance extrapolated from the trailing coefficients, and an
    analytic evaluator, when present, is trusted directly.
    """
    c = dist.coeffs
    neg = NegativityReport.scan(c, neg_tol)
    c0 = float(c[0])
    if dist.analytic is not None:
        total = float(np.real(dist.analytic(1.0)))
        slack = 1e-8
    else:
        total = float(c.sum())
        slack = max(sum_tol, 4.0 * len(c) * float(np.abs(c[-16:]).max()))
    return MembershipReport(
        negativity=neg,
        zero_at_zero=abs(c0) <= 1e-9,
        constant_term=c0,
        sum_at_one=total,
        normalized=abs(total - 1.0) <= slack,
    )


@dataclass
class AMembershipReport:
    base: MembershipReport
    matched: MembershipReport

    @property
    def ok(self) -> bool:
        return self.base.ok and self.matched.ok


def is_in_A(dist: DegreeDist) -> AMembershipReport:
    """f belongs to the set iff both f and Tf are valid d.d. functions."""
    base = is_in_P(dist)
    tf = t_operator_series(dist)
    return AMembershipReport(base=base, matched=is_in_P(tf))


# -- symmetry -------------------------------------------------------------------

_SWAPPED_FAMILY = {
    Family.ARA: Family.ARA,
    Family.LDPC: Family.LDPC,
    Family.NSIRA: Family.ALDPC,
    Family.ALDPC: Family.NSIRA,
}


def symmetry_swap(pair: DegreeDistPair) -> DegreeDistPair:
    """Swap bit and check distributions, map p to 1-p, remap the family."""
    new_bit = replace(pair.check, side=Side.BIT)
    new_check = replace(pair.bit, side=Side.CHECK)
    nb = replace(pair.check_node, side=Side.BIT) if pair.check_node else None
    nc = replace(pair.bit_node, side=Side.CHECK) if pair.bit_node else None
    p = pair.p if pair.family is Family.LDPC else 1.0 - pair.p
    return DegreeDistPair(new_bit, new_check, _SWAPPED_FAMILY[pair.family], p,
                          bit_node=nb, check_node=nc)


# -- JSON -----------------------------------------------------------------------


def dist_to_json(dist: DegreeDist, family: Family, p: float) -> dict:
    return {
        "family": family.value,
        "p": p,
        "perspective": dist.perspective.value,
        "side": dist.side.value,
        "precision": dist.precision,
        "coeffs": [float(c) for c in dist.coeffs],
    }


def dist_from_json(doc: dict) -> DegreeDist:
    series = PowerSeries(doc["coeffs"], doc["precision"])
    return DegreeDist(series, Perspective(doc["perspective"]), Side(doc["side"]))


def pair_to_json(pair: DegreeDistPair, meta: dict | None = None) -> dict:
    doc = {
        "family": pair.family.value,
        "p": pair.p,
        "bit": dist_to_json(pair.bit, pair.family, pair.p),
        "check": dist_to_json(pair.check, pair.family, pair.p),
    }
    if meta:
        doc["meta"] = meta
    return doc


def pair_from_json(doc: dict) -> DegreeDistPair:
    return DegreeDistPair(
        dist_from_json(doc["bit"]),
        dist_from_json(doc["check"]),
        Family(doc["family"]),
        float(doc["p"]),
    )


def dumps(doc: dict) -> str:
    """Canonical JSON: sorted keys, repr floats (shortest round-trip form)."""
    return json.dumps(doc, sort_keys=True, indent=1)


def _unit(n: int) -> np.ndarray:
    u = np.zeros(n)
    u[0] = 1.0
    return u
