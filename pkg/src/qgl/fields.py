"""Closed-form weights, potentials, densities, cutoffs, and test functions.

Everything here is a function of the distance ``d`` to the graph root (plus
time for the space-time test functions), evaluated either at a single graph
point or vectorized over all grid nodes.  Arclength derivatives use the fact
that ``d`` is piecewise linear with slope +-1 along every edge; at the one
possible interior kink per edge the derivative is one-sided and the result
is flagged rather than raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import BadParamsError
from .graphs import MetricGraph, Point
from .mesh import GraphFunction, Grid

# Exact derivative suprema of the quintic ramp used by the cutoff profile.
CUTOFF_C1 = 15.0 / 8.0
CUTOFF_C2 = 10.0 / math.sqrt(3.0)


@dataclass(frozen=True)
class WeightSpec:
    """Positive weight of a growth class: ``exp_beta`` or ``poly_lambda``.

    ``exp_beta``  : exp(-beta * d), beta > 0.
    ``poly_lambda``: (d + k)^(-lam), lam > 0, k >= 1.
    """

    kind: str
    beta: float = 1.0
    lam: float = 1.0
    k: float = 1.0

    def __post_init__(self):
        if self.kind not in ("exp_beta", "poly_lambda"):
            raise BadParamsError(f"unknown weight kind {self.kind!r}")
        if self.kind == "exp_beta" and not self.beta > 0:
            raise BadParamsError("weight rate beta must be positive")
        if self.kind == "poly_lambda":
            if not self.lam > 0:
                raise BadParamsError("weight exponent must be positive")
            if self.k < 1:
                raise BadParamsError("weight shift k must be >= 1")

    def value(self, d):
        if self.kind == "exp_beta":
            return np.exp(-self.beta * np.asarray(d, dtype=float))
        return (np.asarray(d, dtype=float) + self.k) ** (-self.lam)


@dataclass(frozen=True)
class PotentialSpec:
    """Potential profile: constant floor or the tight decaying lower bound.

    ``bounded_below``: V = V0 everywhere.
    ``decaying``     : V = V0 * (d + k)^(-theta), 0 < theta <= 2, k >= 1.

    Both are the equality case of the admissible class, which is the tight
    one for the certificate margins.
    """

    kind: str
    V0: float
    theta: float = 2.0
    k: float = 1.0

    def __post_init__(self):
        _validate_profile(self.kind, self.V0, self.theta, self.k, "potential floor V0")

    def value(self, d):
        if self.kind == "bounded_below":
            return np.full_like(np.asarray(d, dtype=float), self.V0)
        return self.V0 * (np.asarray(d, dtype=float) + self.k) ** (-self.theta)


@dataclass(frozen=True)
class DensitySpec:
    """Density profile with the same two shapes as :class:`PotentialSpec`."""

    kind: str
    rho0: float
    theta: float = 2.0
    k: float = 1.0

    def __post_init__(self):
        _validate_profile(self.kind, self.rho0, self.theta, self.k, "density floor rho0")

    def value(self, d):
        if self.kind == "bounded_below":
            return np.full_like(np.asarray(d, dtype=float), self.rho0)
        return self.rho0 * (np.asarray(d, dtype=float) + self.k) ** (-self.theta)


def _validate_profile(kind, floor, theta, k, label):
    if kind not in ("bounded_below", "decaying"):
        raise BadParamsError(f"unknown profile kind {kind!r}")
    if not floor > 0:
        raise BadParamsError(f"{label} must be positive, got {floor}")
    if kind == "decaying":
        if not 0 < theta <= 2:
            raise BadParamsError(f"decay exponent theta must lie in (0, 2], got {theta}")
        if k < 1:
            raise BadParamsError(f"shift k must be >= 1, got {k}")


@dataclass(frozen=True)
class TestFnSpec:
    """Test function of the energy arguments, one of four kinds.

    ``exp``      : -alpha * d                  (enters integrals as its exponential)
    ``poly``     : (d + k)^(-sigma)
    ``exp_time`` : -gamma * t - alpha * d
    ``poly_time``: exp(-gamma * t) * (d + k)^(-sigma)
    """

    kind: str
    alpha: float = 0.0
    sigma: float = 1.0
    gamma: float = 0.0
    k: float = 1.0

    def __post_init__(self):
        if self.kind not in ("exp", "poly", "exp_time", "poly_time"):
            raise BadParamsError(f"unknown test-function kind {self.kind!r}")
        if self.alpha < 0:
            raise BadParamsError("alpha must be >= 0")
        if self.gamma < 0:
            raise BadParamsError("gamma must be >= 0")
        if self.kind in ("poly", "poly_time"):
            if not self.sigma > 0:
                raise BadParamsError("sigma must be positive")
            if self.k < 1:
                raise BadParamsError("shift k must be >= 1")

    @property
    def time_dependent(self) -> bool:
        return self.kind in ("exp_time", "poly_time")


@dataclass(frozen=True)
class CutoffSpec:
    """Radial cutoff equal to 1 inside the ball of radius R, 0 beyond 2R.

    The ramp between the two radii is the quintic smoothstep, which is C2
    with exactly computable derivative suprema C1 and C2 (attained at the
    midpoint and at the inflection points of the ramp).
    """

    R: float
    C1: float = CUTOFF_C1
    C2: float = CUTOFF_C2

    def __post_init__(self):
        if not self.R > 0:
            raise BadParamsError(f"cutoff radius must be positive, got {self.R}")


class FieldValues(NamedTuple):
    """Point evaluation with arclength/time derivatives.

    ``at_kink`` marks samples sitting on a kink of the distance function,
    where ``ds`` is the one-sided value from the edge-source side.
    """

    value: float
    ds: float
    dss: float
    dt: float
    at_kink: bool


# -- point geometry helpers ------------------------------------------------


def _distance_and_slope(graph: MetricGraph, x: Point) -> tuple[float, float, bool]:
    """Distance from the root and the slope of d along the point's edge.

    Vertex points report slope +1 (the direction of increasing distance);
    only squared or distance-only quantities are meaningful there.
    """
    dv = graph.vertex_distances(graph.root)
    if x.vertex is not None:
        return dv[x.vertex], 1.0, False
    e = graph.edge(x.edge)
    down = dv[e.src] + x.offset
    up = dv[e.dst] + (e.length - x.offset)
    kink = abs(down - up) <= 1e-12 * max(1.0, down, up)
    if kink:
        return down, 1.0, True
    return min(down, up), (1.0 if down < up else -1.0), False


# -- smoothstep ramp --------------------------------------------------------


def _ramp(s):
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s))


def _ramp_d1(s):
    return 30.0 * s * s * (s - 1.0) ** 2


def _ramp_d2(s):
    return 60.0 * s * (2.0 * s - 1.0) * (s - 1.0)


def cutoff_profile(t):
    """Value of the radial profile at t = d/R, with its first two derivatives.

    Vectorized; the derivatives are taken with respect to t.
    """
    t = np.asarray(t, dtype=float)
    inside = t <= 1.0
    outside = t >= 2.0
    s = np.clip(t - 1.0, 0.0, 1.0)
    value = np.where(inside, 1.0, np.where(outside, 0.0, 1.0 - _ramp(s)))
    d1 = np.where(inside | outside, 0.0, -_ramp_d1(s))
    d2 = np.where(inside | outside, 0.0, -_ramp_d2(s))
    return value, d1, d2


# -- point evaluation --------------------------------------------------------


def eval_weight(spec: WeightSpec, graph: MetricGraph, x: Point) -> float:
    """Weight value at a point; strictly positive."""
    d, _, _ = _distance_and_slope(graph, x)
    return float(spec.value(d))


def eval_test_function(
    spec: TestFnSpec, graph: MetricGraph, x: Point, t: float | None = None
) -> FieldValues:
    """Test-function value with exact arclength and time derivatives."""
    if spec.time_dependent and t is None:
        raise BadParamsError(f"kind {spec.kind!r} needs a time argument")
    d, slope, at_kink = _distance_and_slope(graph, x)
    if spec.kind == "exp":
        return FieldValues(-spec.alpha * d, -spec.alpha * slope, 0.0, 0.0, at_kink)
    if spec.kind == "exp_time":
        return FieldValues(
            -spec.gamma * t - spec.alpha * d, -spec.alpha * slope, 0.0,
            -spec.gamma, at_kink,
        )
    base = (d + spec.k) ** (-spec.sigma)
    d1 = -spec.sigma * (d + spec.k) ** (-spec.sigma - 1.0) * slope
    d2 = spec.sigma * (spec.sigma + 1.0) * (d + spec.k) ** (-spec.sigma - 2.0)
    if spec.kind == "poly":
        return FieldValues(base, d1, d2, 0.0, at_kink)
    decay = math.exp(-spec.gamma * t)
    return FieldValues(
        decay * base, decay * d1, decay * d2, -spec.gamma * decay * base, at_kink
    )


def eval_cutoff(spec: CutoffSpec, graph: MetricGraph, x: Point) -> FieldValues:
    """Cutoff value in [0, 1] with arclength derivatives bounded by C1/R, C2/R^2."""
    d, slope, at_kink = _distance_and_slope(graph, x)
    value, d1, d2 = cutoff_profile(d / spec.R)
    return FieldValues(
        float(value), float(d1) * slope / spec.R, float(d2) / spec.R**2, 0.0, at_kink
    )


# -- nodal sampling -----------------------------------------------------------


def make_potential(spec: PotentialSpec, graph: MetricGraph, grid: Grid) -> GraphFunction:
    """Nodal samples of the potential profile (strictly positive)."""
    return GraphFunction(grid, spec.value(grid.node_distances))


def make_density(spec: DensitySpec, graph: MetricGraph, grid: Grid) -> GraphFunction:
    """Nodal samples of the density profile (strictly positive)."""
    return GraphFunction(grid, spec.value(grid.node_distances))


def sample_weight(spec: WeightSpec, grid: Grid) -> GraphFunction:
    return GraphFunction(grid, spec.value(grid.node_distances))


def sample_cutoff(spec: CutoffSpec, grid: Grid):
    """Nodal cutoff value and |derivative| arrays: (eta, |eta'|, eta'')."""
    value, d1, d2 = cutoff_profile(grid.node_distances / spec.R)
    return value, np.abs(d1) / spec.R, d2 / spec.R**2


def sample_energy_weight(spec: TestFnSpec, grid: Grid, t: float | None = None) -> np.ndarray:
    """The positive multiplicative weight a test function contributes.

    ``exp`` kinds enter the energy integrals through their exponential;
    ``poly`` kinds enter directly.
    """
    if spec.time_dependent and t is None:
        raise BadParamsError(f"kind {spec.kind!r} needs a time argument")
    d = grid.node_distances
    if spec.kind == "exp":
        return np.exp(-spec.alpha * d)
    if spec.kind == "exp_time":
        return np.exp(-spec.gamma * t - spec.alpha * d)
    base = (d + spec.k) ** (-spec.sigma)
    if spec.kind == "poly":
        return base
    return math.exp(-spec.gamma * t) * base


# -- regularized absolute powers ----------------------------------------------


def smooth_abs_power_half(u, alpha: float, p: float):
    """``(u^2 + alpha)^(p/4)``, a smooth stand-in for |u|^(p/2).

    Decreases to |u|^(p/2) as alpha decreases to 0; strictly increasing in
    alpha for fixed u.
    """
    _validate_regularization(alpha, p)
    u = np.asarray(u, dtype=float)
    out = (u * u + alpha) ** (p / 4.0)
    return float(out) if out.ndim == 0 else out


def smooth_abs_power(u, alpha: float, p: float):
    """``(u^2 + alpha)^(p/2)``, a smooth stand-in for |u|^p."""
    _validate_regularization(alpha, p)
    u = np.asarray(u, dtype=float)
    out = (u * u + alpha) ** (p / 2.0)
    return float(out) if out.ndim == 0 else out


def _validate_regularization(alpha: float, p: float):
    if not alpha > 0:
        raise BadParamsError(f"regularization alpha must be positive, got {alpha}")
    if p < 1:
        raise BadParamsError(f"exponent p must be >= 1, got {p}")
