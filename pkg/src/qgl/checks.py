"""Numerical certificates for the pointwise and integral inequalities.

Two families of checks:

* Pointwise certificates evaluate both sides of a differential inequality of
  a test profile at every non-kink grid node and report the worst margin.
  These are exact algebra, not discretization-limited, so admissible
  parameters with the tight (equality-case) potential or density profiles
  pass with margin zero up to roundoff.

* Integral checks evaluate both sides of an energy inequality by quadrature
  (trapezoid in space, trapezoid over snapshots in time) and pass when the
  left side does not exceed the right by more than a tolerance proportional
  to the mesh step and the scale of the larger side.

Inadmissible parameters never raise: the check runs and the report flags
the violated hypothesis, because seeing an inequality fail outside its
hypothesis is part of the experiment.  A report with ``admissible=False``
does not fail a verification run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadParamsError
from .fields import (
    CutoffSpec,
    DensitySpec,
    PotentialSpec,
    TestFnSpec,
    WeightSpec,
    sample_cutoff,
    sample_energy_weight,
    sample_weight,
)
from .graphs import MetricGraph, Point, truncated_ray
from .mesh import (
    GraphFunction,
    Grid,
    assemble_stiffness,
    integrate,
    integrate_ball,
    weighted_lp_norm,
)
from .solvers import (
    EllipticProblem,
    ParabolicProblem,
    Trajectory,
    exact_ray_solution,
    kirchhoff_residual,
    solve_elliptic,
    solve_heat,
)

POINTWISE_TOL = 1e-12
INTEGRAL_TOL_FACTOR = 10.0


@dataclass
class CheckReport:
    """Outcome of one certificate or energy check.

    ``margin`` is the minimum of (right side - left side) over everything
    sampled; nonnegative margins pass.  ``admissible`` records whether the
    parameters satisfy the hypothesis the inequality was derived under; a
    failed inadmissible check is informational, not an error.
    """

    name: str
    passed: bool
    admissible: bool
    margin: float
    lhs: float
    rhs: float
    tolerance: float
    worst_point: Point | None = None
    worst_time: float | None = None
    samples_checked: int = 0
    samples_skipped_kink: int = 0
    note: str = ""
    extra: dict = field(default_factory=dict)

    def worst_label(self) -> str:
        if self.worst_point is None:
            return ""
        label = str(self.worst_point)
        if self.worst_time is not None:
            label += f" at t={float(self.worst_time)!r}"
        return label


@dataclass
class GrowthProfile:
    """Ball integrals of a solution against increasing radii, with a fit.

    ``slope`` is the least-squares slope of ``log(integral)`` against the
    radius (exponential class) or against ``log(radius + k)`` (polynomial
    class); None when fewer than two integrals are positive (degenerate).
    """

    kind: str
    k: float
    entries: list[tuple[float, float]]
    slope: float | None
    tau: float | None = None

    @property
    def degenerate(self) -> bool:
        return self.slope is None


def _pointwise_report(name, lhs_arrays, rhs_arrays, grid, keep, times, tol,
                      admissible, note, extra):
    """Fold per-inequality sample arrays into a CheckReport.

    ``lhs_arrays``/``rhs_arrays`` are lists of (n_times, n_kept) arrays over
    the kept (non-kink) nodes.
    """
    kept_idx = np.nonzero(keep)[0]
    margin = math.inf
    worst_node = None
    worst_time = None
    worst_lhs = worst_rhs = 0.0
    for lhs, rhs in zip(lhs_arrays, rhs_arrays):
        gap = rhs - lhs
        flat = int(np.argmin(gap))
        ti, ni = divmod(flat, gap.shape[1])
        if gap[ti, ni] < margin:
            margin = float(gap[ti, ni])
            worst_node = int(kept_idx[ni])
            worst_time = None if times is None else float(times[ti])
            worst_lhs = float(lhs[ti, ni])
            worst_rhs = float(rhs[ti, ni])
    n_times = 1 if times is None else len(times)
    return CheckReport(
        name=name,
        passed=bool(admissible_content(extra) and margin >= -tol),
        admissible=admissible,
        margin=margin,
        lhs=worst_lhs,
        rhs=worst_rhs,
        tolerance=tol,
        worst_point=grid.node_location(worst_node) if worst_node is not None else None,
        worst_time=worst_time,
        samples_checked=int(kept_idx.size) * n_times * len(lhs_arrays),
        samples_skipped_kink=int((~keep).sum()) * n_times * len(lhs_arrays),
        note=note,
        extra=extra,
    )


def admissible_content(extra: dict) -> bool:
    """Certificates whose bound constant must be strictly useful record it."""
    return all(v > 0 for k, v in extra.items() if k.endswith("_constant"))


# -- pointwise certificates -------------------------------------------------


def check_exp_elliptic(graph: MetricGraph, grid: Grid, alpha: float, p: float,
                       potential: PotentialSpec, tol: float = POINTWISE_TOL) -> CheckReport:
    """Drift of the exponential radial profile against a potential floor.

    At every non-kink node the squared slope of the profile exponent minus
    ``p`` times the potential must stay below the constant budget
    ``alpha^2 - p*V0``, and the budget itself must be negative for the
    certificate to carry uniqueness content.  Admissible range:
    ``0 < alpha < sqrt(p*V0)``.
    """
    if potential.kind != "bounded_below":
        raise BadParamsError("exponential certificate needs a bounded-below potential")
    if p < 1:
        raise BadParamsError(f"p must be >= 1, got {p}")
    budget = alpha * alpha - p * potential.V0
    admissible = 0.0 < alpha < math.sqrt(p * potential.V0)
    keep = ~grid.kink_mask
    d = grid.node_distances[keep]
    v_vals = potential.value(d)
    # both inequalities coincide: the profile exponent has no curvature
    lhs = (alpha * alpha - p * v_vals)[None, :]
    rhs = np.full_like(lhs, budget)
    note = "" if admissible else (
        f"alpha={alpha!r} outside (0, sqrt(p*V0)={math.sqrt(p * potential.V0)!r})"
    )
    extra = {"budget_constant": -budget, "alpha": alpha, "p": p}
    return _pointwise_report(
        "testfn_exp_elliptic", [lhs], [rhs], grid, keep, None, tol,
        admissible, note, extra,
    )


def check_poly_elliptic(graph: MetricGraph, grid: Grid, sigma: float, p: float,
                        potential: PotentialSpec, tol: float = POINTWISE_TOL) -> CheckReport:
    """Radial-power profile against a decaying potential.

    Certifies the two differential inequalities with coercivity constants
    ``K = p*V0 - sigma^2`` (logarithmic-derivative form) and
    ``H = p*V0 - sigma*(sigma+1)`` (curvature form, weighted by the profile
    itself); both constants must be positive.  Admissible range:
    ``0 < sigma < (sqrt(1 + 4*p*V0) - 1)/2``, which is the stricter of the
    two single-inequality ranges.
    """
    if potential.kind != "decaying":
        raise BadParamsError("radial-power certificate needs a decaying potential")
    if p < 1:
        raise BadParamsError(f"p must be >= 1, got {p}")
    v0, k = potential.V0, potential.k
    const_k = p * v0 - sigma * sigma
    const_h = p * v0 - sigma * (sigma + 1.0)
    sigma_max = 0.5 * (math.sqrt(1.0 + 4.0 * p * v0) - 1.0)
    admissible = 0.0 < sigma < sigma_max
    keep = ~grid.kink_mask
    d = grid.node_distances[keep]
    shifted = d + k
    inv_sq = shifted ** -2.0
    v_vals = potential.value(d)
    profile = shifted ** -sigma
    lhs1 = (sigma * sigma * inv_sq - p * v_vals)[None, :]
    rhs1 = (-const_k * inv_sq)[None, :]
    lhs2 = ((sigma * (sigma + 1.0) * inv_sq - p * v_vals) * profile)[None, :]
    rhs2 = (-const_h * inv_sq * profile)[None, :]
    note = "" if admissible else f"sigma={sigma!r} outside (0, {sigma_max!r})"
    extra = {
        "K_constant": const_k, "H_constant": const_h,
        "sigma": sigma, "p": p, "sigma_max": sigma_max,
    }
    return _pointwise_report(
        "testfn_poly_elliptic", [lhs1, lhs2], [rhs1, rhs2], grid, keep, None, tol,
        admissible, note, extra,
    )


def check_exp_parabolic(graph: MetricGraph, grid: Grid, alpha: float, gamma: float,
                        density: DensitySpec, tol: float = POINTWISE_TOL) -> CheckReport:
    """Space-time exponential profile against a density floor.

    The decay rate must absorb the squared spatial slope:
    ``-gamma * rho + alpha^2 <= 0`` at every node, which the hypothesis
    ``gamma >= alpha^2 / rho0`` guarantees.  Time-independent.
    """
    if density.kind != "bounded_below":
        raise BadParamsError("exponential certificate needs a bounded-below density")
    gamma_min = alpha * alpha / density.rho0
    admissible = gamma >= gamma_min
    keep = ~grid.kink_mask
    rho = density.value(grid.node_distances[keep])
    lhs = (-gamma * rho + alpha * alpha)[None, :]
    rhs = np.zeros_like(lhs)
    note = "" if admissible else f"gamma={gamma!r} below threshold {gamma_min!r}"
    extra = {"alpha": alpha, "gamma": gamma, "gamma_min": gamma_min}
    return _pointwise_report(
        "testfn_exp_parabolic", [lhs], [rhs], grid, keep, None, tol,
        admissible, note, extra,
    )


def check_poly_parabolic(graph: MetricGraph, grid: Grid, sigma: float, gamma: float,
                         density: DensitySpec, times=(0.0, 0.5, 1.0),
                         tol: float = POINTWISE_TOL) -> CheckReport:
    """Decaying space-time profile against a decaying density.

    Certifies both dissipation inequalities of the profile
    ``exp(-gamma t) * (d + k)^(-sigma)`` at every non-kink node and each
    sample time; the hypothesis is ``gamma >= sigma*(sigma+1)/rho0``.  With
    the threshold value and the tight density the curvature inequality is an
    identity, so the margin vanishes; below the threshold it fails first at
    the root at time zero, where the profile is largest.
    """
    if density.kind != "decaying":
        raise BadParamsError("radial-power certificate needs a decaying density")
    gamma_min = sigma * (sigma + 1.0) / density.rho0
    admissible = gamma >= gamma_min
    keep = ~grid.kink_mask
    d = grid.node_distances[keep]
    k = density.k
    shifted = d + k
    inv_sq = shifted ** -2.0
    rho = density.value(d)
    times = np.asarray(times, dtype=float)
    decay = np.exp(-gamma * times)[:, None]
    profile = (shifted ** -sigma)[None, :]
    kappa = decay * profile
    lhs1 = kappa * (-gamma * rho + sigma * sigma * inv_sq)[None, :]
    lhs2 = kappa * (-gamma * rho + sigma * (sigma + 1.0) * inv_sq)[None, :]
    zeros = np.zeros_like(lhs1)
    note = "" if admissible else f"gamma={gamma!r} below threshold {gamma_min!r}"
    extra = {"sigma": sigma, "gamma": gamma, "gamma_min": gamma_min}
    return _pointwise_report(
        "testfn_poly_parabolic", [lhs1, lhs2], [zeros, zeros], grid, keep, times, tol,
        admissible, note, extra,
    )


# -- integral energy checks ---------------------------------------------------


def _integral_report(name, lhs, rhs, grid, admissible=True, note="", extra=None,
                     flip=False) -> CheckReport:
    """Report for LHS <= RHS (or LHS >= RHS when ``flip``) within c*h."""
    tol = INTEGRAL_TOL_FACTOR * grid.max_h * max(abs(lhs), abs(rhs))
    margin = (lhs - rhs) if flip else (rhs - lhs)
    return CheckReport(
        name=name,
        passed=bool(margin >= -tol),
        admissible=admissible,
        margin=float(margin),
        lhs=float(lhs),
        rhs=float(rhs),
        tolerance=float(tol),
        samples_checked=grid.n_unknowns,
        note=note,
        extra=extra or {},
    )


def check_elliptic_energy(u: GraphFunction, p: float, potential: PotentialSpec,
                          eta: CutoffSpec, testfn: TestFnSpec) -> CheckReport:
    """Caccioppoli-type bound for a stationary solution, p >= 2.

    The weighted coercive mass of the solution inside the cutoff must be
    controlled by the cutoff's own gradient term:

        integral |u|^p eta^2 W (p V - drift^2)  <=  4 integral |u|^p |eta'|^2 W

    where W and drift are the multiplicative weight and log-slope of the
    chosen test profile (exponential or radial-power).  Holds for genuine
    solutions with the cutoff supported inside the solution's domain; a
    nonzero Dirichlet datum on the support breaks it, which is itself a
    useful probe.
    """
    if p < 2:
        raise BadParamsError(f"this energy bound needs p >= 2, got {p}")
    if testfn.kind not in ("exp", "poly"):
        raise BadParamsError("stationary energy check needs an exp or poly profile")
    grid = u.grid
    d = grid.node_distances
    v_vals = potential.value(d)
    weight = sample_energy_weight(testfn, grid)
    eta_val, eta_d1, _ = sample_cutoff(eta, grid)
    if testfn.kind == "exp":
        drift_sq = np.full_like(d, testfn.alpha ** 2)
    else:
        drift_sq = testfn.sigma ** 2 * (d + testfn.k) ** -2.0
    mass = np.abs(u.values) ** p
    lhs = integrate(grid, mass * eta_val**2 * weight * (p * v_vals - drift_sq))
    rhs = 4.0 * integrate(grid, mass * eta_d1**2 * weight)
    return _integral_report(
        f"energy_elliptic_{testfn.kind}", lhs, rhs, grid,
        extra={"p": p, "R": eta.R},
    )


def _edgewise_curvature_integral(grid: Grid, w: np.ndarray, f: np.ndarray) -> float:
    """Sum over edges of the trapezoid quadrature of ``w * f''``.

    The second derivative is the classical per-edge one (central differences
    inside, neighbor value copied at the edge ends); the flux jumps sitting
    at the vertices are deliberately excluded, because the integral
    inequalities carry them in a separate vertex sum.
    """
    total = 0.0
    for e in grid.graph.edges:
        idx = grid.edge_nodes(e.id)
        h = grid.edge_h[e.id]
        fe = f[idx]
        we = w[idx]
        if fe.size >= 3:
            curv = np.empty_like(fe)
            curv[1:-1] = (fe[:-2] - 2.0 * fe[1:-1] + fe[2:]) / (h * h)
            curv[0] = curv[1]
            curv[-1] = curv[-2]
        else:
            curv = np.zeros_like(fe)
        total += float(np.trapezoid(we * curv, dx=h))
    return total


def check_elliptic_energy_low_p(u: GraphFunction, p: float, potential: PotentialSpec,
                                f: GraphFunction) -> CheckReport:
    """Test-function bound for a stationary solution, any p >= 1.

    For a nonnegative compactly supported test function f:

        integral |u|^p (-f'' + p V f)  <=  sum over vertices |u|^p K(f)

    with f'' the classical per-edge curvature (central differences) and the
    vertex fluxes K(f) realized through one-sided difference residuals
    (derivatives pointing away from each vertex).  The two sides discretize
    the integration by parts through independent stencils, so the check has
    teeth.
    """
    if p < 1:
        raise BadParamsError(f"p must be >= 1, got {p}")
    grid = u.grid
    if f.grid is not grid:
        raise BadParamsError("test function and solution live on different grids")
    if np.any(f.values < -1e-12):
        raise BadParamsError("test function must be nonnegative")
    v_vals = potential.value(grid.node_distances)
    mass = np.abs(u.values) ** p
    lhs = (
        -_edgewise_curvature_integral(grid, mass, f.values)
        + integrate(grid, mass * p * v_vals * f.values)
    )
    rhs = sum(
        mass[grid.vertex_index[v]] * kirchhoff_residual(grid, f, v)
        for v in sorted(grid.graph.vertices)
    )
    return _integral_report(
        "energy_elliptic_low_p", lhs, rhs, grid, extra={"p": p},
    )


def _time_weights(times: np.ndarray) -> np.ndarray:
    """Trapezoid weights over the snapshot times."""
    w = np.zeros_like(times)
    if times.size > 1:
        dt = np.diff(times)
        w[:-1] += 0.5 * dt
        w[1:] += 0.5 * dt
    return w


def check_parabolic_energy(traj: Trajectory, p: float, density: DensitySpec,
                           eta: CutoffSpec, testfn: TestFnSpec, tau: float) -> CheckReport:
    """Weighted-mass bound for a heat trajectory with zero initial data, p >= 2.

    The density-weighted mass at time tau inside the cutoff must be bounded
    by the accumulated cutoff-gradient term plus the accumulated dissipation
    bracket of the space-time profile:

        integral rho |u(tau)|^p W(tau) eta^2
            <= 4 int_0^tau integral |u|^p |eta'|^2 W
               + int_0^tau integral |u|^p [rho dW/dt/W + drift^2] W eta^2

    With an admissible decay rate the bracket is nonpositive and the bound
    reduces to the gradient term.  Time integrals use the snapshot grid.
    """
    if p < 2:
        raise BadParamsError(f"this energy bound needs p >= 2, got {p}")
    if not testfn.time_dependent:
        raise BadParamsError("parabolic energy check needs a time-dependent profile")
    grid = traj.grid
    i_tau = traj.snapshot_index(tau)
    d = grid.node_distances
    rho = density.value(d)
    eta_val, eta_d1, _ = sample_cutoff(eta, grid)
    if testfn.kind == "exp_time":
        bracket = -testfn.gamma * rho + testfn.alpha ** 2
    else:
        bracket = -testfn.gamma * rho + testfn.sigma ** 2 * (d + testfn.k) ** -2.0
    times = traj.times[: i_tau + 1]
    tw = _time_weights(times)
    grad_term = 0.0
    bracket_term = 0.0
    for i, t in enumerate(times):
        weight = sample_energy_weight(testfn, grid, t)
        mass = np.abs(traj.values[i]) ** p
        grad_term += tw[i] * integrate(grid, mass * eta_d1**2 * weight)
        bracket_term += tw[i] * integrate(grid, mass * bracket * weight * eta_val**2)
    weight_tau = sample_energy_weight(testfn, grid, float(traj.times[i_tau]))
    lhs = integrate(
        grid, rho * np.abs(traj.values[i_tau]) ** p * weight_tau * eta_val**2
    )
    rhs = 4.0 * grad_term + bracket_term
    admissible, note, extra = _parabolic_admissibility(testfn, density)
    extra.update({"p": p, "tau": tau, "R": eta.R})
    return _integral_report(
        f"energy_parabolic_{'exp' if testfn.kind == 'exp_time' else 'poly'}",
        lhs, rhs, grid, admissible=admissible, note=note, extra=extra,
    )


def check_parabolic_energy_low_p(traj: Trajectory, p: float, density: DensitySpec,
                                 eta: CutoffSpec, testfn: TestFnSpec,
                                 tau: float) -> CheckReport:
    """Space-time test-function bound for a heat trajectory, any p >= 1.

    Builds the compactly supported space-time test function v = eta * W from
    the cutoff and the profile and checks

        int_0^tau integral |u|^p (rho dv/dt + v'')
            >= integral rho |u(tau)|^p v(tau) + int_0^tau sum_vertices |u|^p K(v)

    with v'' through the stiffness action and K(v) through the one-sided
    vertex flux residuals (paper orientation: into-edge derivatives negated).
    Both profile kinds factor as exp(-gamma t) times a spatial shape, which
    the implementation exploits.
    """
    if p < 1:
        raise BadParamsError(f"p must be >= 1, got {p}")
    if not testfn.time_dependent:
        raise BadParamsError("parabolic energy check needs a time-dependent profile")
    grid = traj.grid
    i_tau = traj.snapshot_index(tau)
    rho = density.value(grid.node_distances)
    eta_val, _, _ = sample_cutoff(eta, grid)
    v0_vals = eta_val * sample_energy_weight(testfn, grid, 0.0)
    stiffness = assemble_stiffness(grid.graph, grid)
    a_v0 = stiffness @ v0_vals
    v0_fn = GraphFunction(grid, v0_vals)
    flux0 = {
        v: kirchhoff_residual(grid, v0_fn, v) for v in sorted(grid.graph.vertices)
    }
    times = traj.times[: i_tau + 1]
    tw = _time_weights(times)
    lhs = 0.0
    flux_term = 0.0
    for i, t in enumerate(times):
        decay = math.exp(-testfn.gamma * t)
        mass = np.abs(traj.values[i]) ** p
        # rho * dv/dt = -gamma * rho * v; integral of |u|^p v'' = -mass . (A v)
        lhs += tw[i] * (
            integrate(grid, mass * rho * (-testfn.gamma) * decay * v0_vals)
            - float(mass @ (decay * a_v0))
        )
        flux_term += tw[i] * decay * sum(
            -mass[grid.vertex_index[v]] * flux0[v] for v in sorted(grid.graph.vertices)
        )
    decay_tau = math.exp(-testfn.gamma * float(traj.times[i_tau]))
    rhs = (
        integrate(grid, rho * np.abs(traj.values[i_tau]) ** p * decay_tau * v0_vals)
        + flux_term
    )
    admissible, note, extra = _parabolic_admissibility(testfn, density)
    extra.update({"p": p, "tau": tau, "R": eta.R})
    return _integral_report(
        "energy_parabolic_low_p", lhs, rhs, grid,
        admissible=admissible, note=note, extra=extra, flip=True,
    )


def _parabolic_admissibility(testfn: TestFnSpec, density: DensitySpec):
    """Decay-rate hypothesis of the dissipation bracket for either profile."""
    if testfn.kind == "exp_time":
        if density.kind != "bounded_below":
            return False, "exponential profile certified only against a density floor", {}
        gamma_min = testfn.alpha ** 2 / density.rho0
    else:
        gamma_min = testfn.sigma * (testfn.sigma + 1.0) / density.rho0
    if testfn.gamma >= gamma_min:
        return True, "", {"gamma_min": gamma_min}
    return (
        False,
        f"gamma={testfn.gamma!r} below threshold {gamma_min!r}",
        {"gamma_min": gamma_min},
    )


# -- growth profiles ----------------------------------------------------------


def growth_profile(source, p: float, weight_kind: str, r_list, k: float = 1.0,
                   tau: float | None = None) -> GrowthProfile:
    """Ball integrals of |solution|^p against the radius, with a fitted slope.

    ``source`` is a stationary solution (GraphFunction) or a Trajectory; the
    parabolic form integrates additionally over [0, tau] on the snapshot
    grid.  ``weight_kind`` selects the fit model: ``exp_beta`` fits
    log(integral) against R, ``poly_lambda`` against log(R + k).
    """
    if weight_kind not in ("exp_beta", "poly_lambda"):
        raise BadParamsError(f"unknown weight kind {weight_kind!r}")
    if p < 1:
        raise BadParamsError(f"p must be >= 1, got {p}")
    radii = [float(r) for r in r_list]
    if len(radii) < 1 or any(r <= 0 for r in radii):
        raise BadParamsError("radii must be positive")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise BadParamsError("radii must be strictly increasing")

    if isinstance(source, Trajectory):
        if tau is None:
            raise BadParamsError("a trajectory profile needs tau")
        grid = source.grid
        i_tau = source.snapshot_index(tau)
        reach = float(grid.node_distances.max())
        if radii[-1] > reach + 1e-9:
            raise BadParamsError(
                f"max radius {radii[-1]} exceeds the truncation reach {reach}"
            )
        tw = _time_weights(source.times[: i_tau + 1])
        entries = []
        for r in radii:
            total = sum(
                tw[i] * integrate_ball(grid, np.abs(source.values[i]) ** p, r)
                for i in range(i_tau + 1)
            )
            entries.append((r, float(total)))
    else:
        grid = source.grid
        reach = float(grid.node_distances.max())
        if radii[-1] > reach + 1e-9:
            raise BadParamsError(
                f"max radius {radii[-1]} exceeds the truncation reach {reach}"
            )
        mass = np.abs(source.values) ** p
        entries = [(r, float(integrate_ball(grid, mass, r))) for r in radii]

    xs, ys = [], []
    for r, val in entries:
        if val > 0.0:
            xs.append(r if weight_kind == "exp_beta" else math.log(r + k))
            ys.append(math.log(val))
    slope = None
    if len(xs) >= 2:
        slope = float(np.polyfit(np.asarray(xs), np.asarray(ys), 1)[0])
    return GrowthProfile(kind=weight_kind, k=k, entries=entries, slope=slope, tau=tau)


# -- uniqueness experiments -----------------------------------------------------


@dataclass
class UniquenessResult:
    report: CheckReport
    profile: GrowthProfile | None


# -- report serialization -------------------------------------------------------


def _fmt(x) -> str:
    """Shortest round-trip decimal form, capped at 17 significant digits."""
    return repr(float(x))


def reports_to_csv(reports) -> str:
    """One row per check; fixed column order and float formatting."""
    lines = ["name,passed,admissible,margin,lhs,rhs,tolerance,worst_point"]
    for r in reports:
        worst = r.worst_label().replace(",", ";")
        lines.append(
            f"{r.name},{str(r.passed).lower()},{str(r.admissible).lower()},"
            f"{_fmt(r.margin)},{_fmt(r.lhs)},{_fmt(r.rhs)},{_fmt(r.tolerance)},{worst}"
        )
    return "\n".join(lines) + "\n"


def profiles_to_csv(profiles) -> str:
    """Growth profiles as (profile, R, integral) rows plus one slope row each."""
    lines = ["profile,R,value"]
    for name, prof in profiles:
        for r, val in prof.entries:
            lines.append(f"{name},{_fmt(r)},{_fmt(val)}")
        slope = "degenerate" if prof.slope is None else _fmt(prof.slope)
        lines.append(f"{name},slope,{slope}")
    return "\n".join(lines) + "\n"


def summary_text(reports, profiles=(), header_lines=()) -> str:
    """Human-readable one-line-per-check summary."""
    lines = list(header_lines)
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        if not r.admissible:
            status += " (inadmissible)"
        line = (
            f"{r.name:<28} {status:<22} margin={_fmt(r.margin)} "
            f"lhs={_fmt(r.lhs)} rhs={_fmt(r.rhs)} tol={_fmt(r.tolerance)}"
        )
        if r.worst_point is not None:
            line += f" worst={r.worst_label()}"
        if r.samples_skipped_kink:
            line += f" kink_skipped={r.samples_skipped_kink}"
        if r.note:
            line += f"  [{r.note}]"
        lines.append(line)
    for name, prof in profiles:
        slope = "degenerate" if prof.slope is None else _fmt(prof.slope)
        lines.append(f"growth {name}: slope={slope} over {len(prof.entries)} radii")
    counted = [r for r in reports if r.admissible]
    failed = sum(1 for r in counted if not r.passed)
    lines.append(
        f"{len(reports)} checks, {len(counted)} admissible, {failed} failed"
    )
    return "\n".join(lines) + "\n"


def elliptic_weight_thresholds(p: float, v0: float) -> dict[str, float]:
    """Admissible upper bounds of the stationary uniqueness classes.

    ``exp_rate`` bounds the exponential weight rate (half the certificate
    slope bound); ``exp_rate_low_p_variant`` is the alternative threshold
    the low-p argument opens with, exposed rather than silently chosen.
    ``poly_power`` / ``poly_power_low_p`` bound the polynomial weight power
    for p >= 2 and p < 2 respectively.
    """
    return {
        "exp_rate": math.sqrt(p * v0) / 2.0,
        "exp_rate_low_p_variant": (math.sqrt(1.0 + 4.0 * p * v0) - 1.0) / 4.0,
        "poly_power": math.sqrt(p * v0),
        "poly_power_low_p": (math.sqrt(1.0 + 4.0 * p * v0) - 1.0) / 2.0,
    }


def _weight_admissibility(kind: str, weight: WeightSpec, p: float,
                          potential: PotentialSpec | None) -> tuple[bool, str]:
    if kind == "parabolic":
        return True, "any positive weight parameter is admissible"
    thresholds = elliptic_weight_thresholds(p, potential.V0)
    if weight.kind == "exp_beta":
        bound = thresholds["exp_rate"]
        ok = 0.0 < weight.beta < bound
        return ok, (
            f"beta={weight.beta!r} vs bound {bound!r} "
            f"(low-p proof variant {thresholds['exp_rate_low_p_variant']!r})"
        )
    bound = thresholds["poly_power"] if p >= 2 else thresholds["poly_power_low_p"]
    return 0.0 < weight.lam < bound, f"lambda={weight.lam!r} vs bound {bound!r}"


def uniqueness_experiment(
    graph: MetricGraph,
    grid: Grid,
    kind: str,
    p: float,
    weight: WeightSpec,
    potential: PotentialSpec | None = None,
    density: DensitySpec | None = None,
    epsilon: float = 1e-6,
    t_final: float = 1.0,
    dt: float | None = None,
    scheme: str = "implicit_euler",
    probe_r_list=(2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0),
    probe_target_h: float = 1.0 / 32.0,
    run_probe: bool = True,
) -> UniquenessResult:
    """Three-part uniqueness experiment on a truncated graph.

    (a) zero data must produce the exactly-zero solution; (b) data
    perturbed at level epsilon must stay below epsilon in sup norm and below
    ``epsilon * measure(double ball)^(1/p)`` in the weighted norm; (c) the
    closed-form radial growth reference on a fresh truncated ray documents
    that leaving the uniqueness class requires breaking the growth bound
    (its fitted slope must match ``p*sqrt(V0)`` and exceed the admissible
    exponential rate).
    """
    if kind not in ("elliptic", "parabolic"):
        raise BadParamsError(f"unknown experiment kind {kind!r}")
    if kind == "elliptic" and potential is None:
        raise BadParamsError("elliptic experiment needs a potential")
    if kind == "parabolic" and density is None:
        raise BadParamsError("parabolic experiment needs a density")
    if not graph.boundary:
        raise BadParamsError("experiment needs marked truncation boundary vertices")
    if dt is None:
        dt = t_final / 200.0

    d_max = float(grid.node_distances.max())
    mu_double_ball = graph.ball_measure(d_max)
    norm_bound = epsilon * mu_double_ball ** (1.0 / p)
    weight_fn = sample_weight(weight, grid)
    tol = 1e-12 * max(epsilon, 1.0)

    if kind == "elliptic":
        v_fn = GraphFunction(grid, potential.value(grid.node_distances))
        zero_sol = solve_elliptic(EllipticProblem(
            graph, grid, potential=v_fn, dirichlet={b: 0.0 for b in graph.boundary},
        ))
        zero_max = zero_sol.max_abs()
        eps_sol = solve_elliptic(EllipticProblem(
            graph, grid, potential=v_fn,
            dirichlet={b: epsilon for b in graph.boundary},
        ))
        sup = eps_sol.max_abs()
        wnorm = weighted_lp_norm(grid, eps_sol, weight=weight_fn, p=p)
    else:
        rho_fn = GraphFunction(grid, density.value(grid.node_distances))
        zeros = GraphFunction.zeros(grid)
        zero_traj = solve_heat(ParabolicProblem(
            graph, grid, rho_fn, zeros, t_final, dt, scheme,
            dirichlet={b: 0.0 for b in graph.boundary},
        ))
        zero_max = float(np.max(np.abs(zero_traj.values)))
        hat = np.zeros(grid.n_unknowns)
        hat[grid.vertex_index[graph.root]] = epsilon
        traj = solve_heat(ParabolicProblem(
            graph, grid, rho_fn, GraphFunction(grid, hat), t_final, dt, scheme,
            dirichlet={b: 0.0 for b in graph.boundary},
        ))
        sup = float(np.max(np.abs(traj.values)))
        wnorm = max(
            weighted_lp_norm(grid, traj.values[i], weight=weight_fn, p=p)
            for i in range(len(traj))
        )

    profile = None
    probe_ok = True
    probe_note = "probe skipped"
    if run_probe:
        v0 = potential.V0 if potential is not None else 1.0
        ray = truncated_ray(max(probe_r_list) / 2.0, 0.5)
        ray_grid = Grid(ray, probe_target_h)
        reference = exact_ray_solution(v0, ray_grid)
        profile = growth_profile(reference, p, "exp_beta", probe_r_list)
        target = p * math.sqrt(v0)
        exp_bound = elliptic_weight_thresholds(p, v0)["exp_rate"]
        probe_ok = (
            profile.slope is not None
            and abs(profile.slope - target) <= 0.05 * target
            and profile.slope > exp_bound
        )
        probe_note = (
            f"radial reference slope {profile.slope!r} vs {target!r}, "
            f"admissible exponential rate bound {exp_bound!r}"
        )

    admissible, weight_note = _weight_admissibility(kind, weight, p, potential)
    zero_ok = zero_max == 0.0
    sup_ok = sup <= epsilon + tol
    norm_ok = wnorm <= norm_bound + tol
    margin = min(epsilon - sup, norm_bound - wnorm, -zero_max)
    return UniquenessResult(
        report=CheckReport(
            name=f"uniqueness_{kind}",
            passed=bool(zero_ok and sup_ok and norm_ok and probe_ok),
            admissible=admissible,
            margin=float(margin),
            lhs=float(sup),
            rhs=float(epsilon),
            tolerance=tol,
            samples_checked=grid.n_unknowns,
            note=f"{weight_note}; {probe_note}",
            extra={
                "zero_max": zero_max,
                "weighted_norm": wnorm,
                "weighted_norm_bound": norm_bound,
                "double_ball_measure": mu_double_ball,
            },
        ),
        profile=profile,
    )
