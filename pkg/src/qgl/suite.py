"""Default verification suite and solve drivers behind the CLI.

A verify run produces, in a fixed order: the four pointwise certificates,
the stationary energy checks on the exactly-zero solution, the parabolic
energy checks on a trajectory started from a root hat of height epsilon,
and the two uniqueness experiments (whose radial growth probes feed the
growth CSV).  Inadmissible rows are informational and never fail a run.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import checks
from .checks import CheckReport, GrowthProfile
from .config import ExperimentConfig
from .errors import ConfigError
from .fields import (
    CutoffSpec,
    DensitySpec,
    PotentialSpec,
    TestFnSpec,
    make_density,
    make_potential,
    sample_cutoff,
    sample_energy_weight,
)
from .graphs import MetricGraph, check_degree_condition
from .mesh import GraphFunction, Grid
from .solvers import (
    EllipticProblem,
    ParabolicProblem,
    Trajectory,
    solve_elliptic,
    solve_heat,
)


@dataclass
class SuiteResult:
    reports: list[CheckReport]
    profiles: list[tuple[str, GrowthProfile]]
    stages: dict[str, float]
    notes: list[str]

    def failures(self) -> list[CheckReport]:
        return [r for r in self.reports if r.admissible and not r.passed]


def _dirichlet_map(cfg: ExperimentConfig, graph: MetricGraph, value: float = 0.0):
    mode = cfg.solver.boundary
    if isinstance(mode, dict):
        return {int(v): float(val) for v, val in mode.items()}
    if mode == "natural":
        return {}
    return {b: value for b in graph.boundary}


def _suite_parameters(cfg: ExperimentConfig, grid: Grid):
    """Wire the energy-check test profiles from the configured weight."""
    over = cfg.testfn_overrides
    if cfg.weight.kind == "exp_beta":
        alpha = 2.0 * cfg.weight.beta
        sigma = 1.0
        k = 1.0
    else:
        alpha = 1.0
        sigma = cfg.weight.lam
        k = cfg.weight.k
    alpha = float(over.get("alpha", alpha))
    sigma = float(over.get("sigma", sigma))
    k = float(over.get("k", k))
    rho0 = cfg.density.rho0
    gamma_exp = float(over.get("gamma", alpha * alpha / rho0))
    gamma_poly = float(over.get("gamma", sigma * (sigma + 1.0) / rho0))
    radius = cfg.cutoff_radius
    if radius is None:
        radius = float(grid.node_distances.max()) / 2.0
    p_high = max(cfg.p, 2.0)
    p_low = cfg.p if cfg.p < 2.0 else 1.5
    return alpha, sigma, k, gamma_exp, gamma_poly, radius, p_high, p_low


def run_verify(cfg: ExperimentConfig, graph: MetricGraph) -> SuiteResult:
    if not graph.boundary:
        raise ConfigError(
            "the verification suite needs a graph with marked boundary vertices"
        )
    reports: list[CheckReport] = []
    profiles: list[tuple[str, GrowthProfile]] = []
    stages: dict[str, float] = {}

    t0 = time.perf_counter()
    grid = Grid(graph, cfg.target_h)
    stages["grid"] = time.perf_counter() - t0

    ok, violators = check_degree_condition(graph)
    notes = [
        "degree condition (arrivals <= departures): "
        + ("holds at every vertex" if ok else f"violated at vertices {violators}")
    ]

    t0 = time.perf_counter()
    cert = cfg.certificates
    ce = cert["exp_elliptic"]
    reports.append(checks.check_exp_elliptic(
        graph, grid, ce["alpha"], ce["p"],
        PotentialSpec("bounded_below", V0=ce["V0"]),
    ))
    cp = cert["poly_elliptic"]
    reports.append(checks.check_poly_elliptic(
        graph, grid, cp["sigma"], cp["p"],
        PotentialSpec("decaying", V0=cp["V0"], theta=cp["theta"], k=cp["k"]),
    ))
    ge = cert["exp_parabolic"]
    reports.append(checks.check_exp_parabolic(
        graph, grid, ge["alpha"], ge["gamma"],
        DensitySpec("bounded_below", rho0=ge["rho0"]),
    ))
    gp = cert["poly_parabolic"]
    t_final = cfg.solver.t_final
    reports.append(checks.check_poly_parabolic(
        graph, grid, gp["sigma"], gp["gamma"],
        DensitySpec("decaying", rho0=gp["rho0"], theta=gp["theta"], k=gp["k"]),
        times=(0.0, t_final / 2.0, t_final),
    ))
    stages["certificates"] = time.perf_counter() - t0

    alpha, sigma, k, gamma_exp, gamma_poly, radius, p_high, p_low = \
        _suite_parameters(cfg, grid)
    cutoff = CutoffSpec(R=radius)

    t0 = time.perf_counter()
    v_fn = make_potential(cfg.potential, graph, grid)
    zero_sol = solve_elliptic(EllipticProblem(
        graph, grid, potential=v_fn, dirichlet={b: 0.0 for b in graph.boundary},
    ))
    exp_fn = TestFnSpec("exp", alpha=alpha)
    poly_fn = TestFnSpec("poly", sigma=sigma, k=k)
    reports.append(checks.check_elliptic_energy(zero_sol, p_high, cfg.potential,
                                                cutoff, exp_fn))
    reports.append(checks.check_elliptic_energy(zero_sol, p_high, cfg.potential,
                                                cutoff, poly_fn))
    eta_val, _, _ = sample_cutoff(cutoff, grid)
    test_f = GraphFunction(grid, eta_val * sample_energy_weight(exp_fn, grid))
    reports.append(checks.check_elliptic_energy_low_p(zero_sol, p_low,
                                                      cfg.potential, test_f))
    stages["energy_elliptic"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    rho_fn = make_density(cfg.density, graph, grid)
    hat = np.zeros(grid.n_unknowns)
    hat[grid.vertex_index[graph.root]] = cfg.epsilon
    traj = solve_heat(ParabolicProblem(
        graph, grid, rho_fn, GraphFunction(grid, hat),
        t_final, cfg.solver.dt_value, cfg.solver.scheme,
        dirichlet=_dirichlet_map(cfg, graph),
    ))
    tau = float(traj.times[-1])
    exp_time_fn = TestFnSpec("exp_time", alpha=alpha, gamma=gamma_exp)
    poly_time_fn = TestFnSpec("poly_time", sigma=sigma, gamma=gamma_poly, k=k)
    reports.append(checks.check_parabolic_energy(traj, p_high, cfg.density,
                                                 cutoff, exp_time_fn, tau))
    reports.append(checks.check_parabolic_energy(traj, p_high, cfg.density,
                                                 cutoff, poly_time_fn, tau))
    reports.append(checks.check_parabolic_energy_low_p(traj, p_low, cfg.density,
                                                       cutoff, exp_time_fn, tau))
    stages["energy_parabolic"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    result = checks.uniqueness_experiment(
        graph, grid, "elliptic", cfg.p, cfg.weight,
        potential=cfg.potential, epsilon=cfg.epsilon, probe_r_list=cfg.r_list,
    )
    reports.append(result.report)
    if result.profile is not None:
        profiles.append(("uniqueness_elliptic_probe", result.profile))
    result = checks.uniqueness_experiment(
        graph, grid, "parabolic", cfg.p, cfg.weight,
        density=cfg.density, epsilon=cfg.epsilon,
        t_final=t_final, dt=cfg.solver.dt_value, scheme=cfg.solver.scheme,
        probe_r_list=cfg.r_list,
    )
    reports.append(result.report)
    if result.profile is not None:
        profiles.append(("uniqueness_parabolic_probe", result.profile))
    stages["uniqueness"] = time.perf_counter() - t0

    return SuiteResult(reports=reports, profiles=profiles, stages=stages, notes=notes)


# -- solve driver ------------------------------------------------------------


@dataclass
class SolveResult:
    csv_text: str
    stages: dict[str, float]


def _initial_function(cfg: ExperimentConfig, grid: Grid) -> GraphFunction:
    kind = cfg.initial.get("kind", "zero")
    value = float(cfg.initial.get("value", 0.0))
    if kind == "zero":
        return GraphFunction.zeros(grid)
    if kind == "constant":
        return GraphFunction.constant(grid, value)
    hat = np.zeros(grid.n_unknowns)
    hat[grid.vertex_index[grid.graph.root]] = value
    return GraphFunction(grid, hat)


def _fmt(x) -> str:
    return repr(float(x))


def _frame_rows(grid: Grid, values, time_value=None) -> list[str]:
    rows = []
    suffix = "" if time_value is None else f",{_fmt(time_value)}"
    for e in sorted(grid.graph.edges, key=lambda e: e.id):
        idx = grid.edge_nodes(e.id)
        offsets = grid.edge_offsets(e.id)
        for s, i in zip(offsets, idx):
            rows.append(f"{e.id},{_fmt(s)},{_fmt(values[i])}{suffix}")
    return rows


def run_solve(cfg: ExperimentConfig, graph: MetricGraph) -> SolveResult:
    if cfg.problem is None:
        raise ConfigError("solve needs 'problem': 'elliptic' or 'parabolic'")
    stages: dict[str, float] = {}
    t0 = time.perf_counter()
    grid = Grid(graph, cfg.target_h)
    stages["grid"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if cfg.problem == "elliptic":
        u = solve_elliptic(EllipticProblem(
            graph, grid,
            potential=make_potential(cfg.potential, graph, grid),
            dirichlet=_dirichlet_map(cfg, graph),
        ))
        lines = ["edge,offset,value"] + _frame_rows(grid, u.values)
    else:
        traj = solve_heat(ParabolicProblem(
            graph, grid,
            make_density(cfg.density, graph, grid),
            _initial_function(cfg, grid),
            cfg.solver.t_final, cfg.solver.dt_value, cfg.solver.scheme,
            dirichlet=_dirichlet_map(cfg, graph),
        ))
        lines = ["edge,offset,value,time"]
        for i in range(len(traj)):
            lines += _frame_rows(grid, traj.values[i], float(traj.times[i]))
    stages["solve"] = time.perf_counter() - t0
    return SolveResult(csv_text="\n".join(lines) + "\n", stages=stages)
