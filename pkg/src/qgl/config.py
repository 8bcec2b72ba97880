"""Experiment configuration: one flat JSON file per experiment.

No interpolation, no includes; unknown keys are rejected so a config diff
always means an experiment diff.  Numeric ranges are validated by
constructing the corresponding spec objects.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import BadParamsError, ConfigError
from .fields import DensitySpec, PotentialSpec, WeightSpec

_TOP_KEYS = {
    "graph", "target_h", "problem", "p", "potential", "density", "weight",
    "cutoff", "test_function", "solver", "initial", "R_list", "epsilon",
    "certificates", "output_dir",
}
_SOLVER_KEYS = {"T", "dt", "scheme", "boundary"}
_CERT_KEYS = {"exp_elliptic", "poly_elliptic", "exp_parabolic", "poly_parabolic"}

DEFAULT_CERTIFICATES = {
    "exp_elliptic": {"alpha": 1.0, "p": 2.0, "V0": 1.0},
    "poly_elliptic": {"sigma": 0.5, "p": 2.0, "V0": 1.0, "theta": 2.0, "k": 1.0},
    "exp_parabolic": {"alpha": 1.0, "gamma": 0.5, "rho0": 2.0},
    "poly_parabolic": {"sigma": 1.0, "gamma": 2.0, "rho0": 1.0, "theta": 2.0, "k": 1.0},
}


@dataclass
class SolverConfig:
    t_final: float = 1.0
    dt: float | None = None
    scheme: str = "implicit_euler"
    boundary: str | dict = "dirichlet"

    @property
    def dt_value(self) -> float:
        return self.t_final / 200.0 if self.dt is None else self.dt


@dataclass
class ExperimentConfig:
    """Validated experiment description; ``raw`` echoes the file content."""

    graph_family: str | None
    graph_params: dict
    graph_file: str | None
    target_h: float
    problem: str | None
    p: float
    potential: PotentialSpec
    density: DensitySpec
    weight: WeightSpec
    cutoff_radius: float | None
    testfn_overrides: dict
    solver: SolverConfig
    initial: dict
    r_list: list[float]
    epsilon: float
    certificates: dict
    output_dir: str
    raw: dict = field(repr=False, default_factory=dict)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _check_keys(mapping: dict, allowed: set, where: str) -> None:
    extra = set(mapping) - allowed
    _require(not extra, f"unknown keys {sorted(extra)} in {where}")


def parse_config(data: dict, raw: dict | None = None) -> ExperimentConfig:
    _require(isinstance(data, dict), "config must be a JSON object")
    _check_keys(data, _TOP_KEYS, "config")
    _require("graph" in data, "config needs a 'graph' entry")
    graph = data["graph"]
    _require(isinstance(graph, dict), "'graph' must be an object")
    graph_file = graph.get("file")
    graph_family = graph.get("family")
    _require(
        (graph_file is None) != (graph_family is None),
        "'graph' needs exactly one of 'file' or 'family'",
    )
    graph_params = dict(graph.get("params", {}))

    problem = data.get("problem")
    _require(
        problem in (None, "elliptic", "parabolic"),
        f"'problem' must be elliptic or parabolic, got {problem!r}",
    )

    try:
        potential = _parse_potential(data.get("potential", {"kind": "bounded_below", "V0": 1.0}))
        density = _parse_density(data.get("density", {"kind": "bounded_below", "rho0": 1.0}))
        weight = _parse_weight(data.get("weight", {"kind": "exp_beta", "beta": 0.5}))
    except BadParamsError as exc:
        raise ConfigError(str(exc)) from None

    cutoff = data.get("cutoff", {})
    _check_keys(cutoff, {"R"}, "'cutoff'")
    cutoff_radius = cutoff.get("R")
    if cutoff_radius is not None:
        _require(cutoff_radius > 0, "cutoff radius must be positive")

    testfn = dict(data.get("test_function", {}))
    _check_keys(testfn, {"kind", "alpha", "sigma", "gamma", "k"}, "'test_function'")

    solver_data = dict(data.get("solver", {}))
    _check_keys(solver_data, _SOLVER_KEYS, "'solver'")
    solver = SolverConfig(
        t_final=float(solver_data.get("T", 1.0)),
        dt=None if solver_data.get("dt") is None else float(solver_data["dt"]),
        scheme=solver_data.get("scheme", "implicit_euler"),
        boundary=solver_data.get("boundary", "dirichlet"),
    )
    _require(solver.t_final > 0, "solver T must be positive")
    _require(solver.dt is None or solver.dt > 0, "solver dt must be positive")
    _require(
        solver.scheme in ("implicit_euler", "crank_nicolson"),
        f"unknown scheme {solver.scheme!r}",
    )
    if isinstance(solver.boundary, str):
        _require(
            solver.boundary in ("dirichlet", "natural"),
            f"boundary mode must be 'dirichlet', 'natural', or a vertex map, "
            f"got {solver.boundary!r}",
        )
    else:
        _require(isinstance(solver.boundary, dict), "boundary must be a mode or map")

    initial = dict(data.get("initial", {"kind": "zero"}))
    _check_keys(initial, {"kind", "value"}, "'initial'")
    _require(
        initial.get("kind", "zero") in ("zero", "constant", "hat"),
        f"unknown initial kind {initial.get('kind')!r}",
    )

    r_list = [float(r) for r in data.get("R_list", [2, 3, 4, 5, 6, 7, 8])]
    _require(len(r_list) >= 2, "'R_list' needs at least two radii")
    _require(all(r > 0 for r in r_list), "radii must be positive")
    _require(
        all(b > a for a, b in zip(r_list, r_list[1:])),
        "'R_list' must be strictly increasing",
    )

    certificates = {k: dict(v) for k, v in DEFAULT_CERTIFICATES.items()}
    cert_data = data.get("certificates", {})
    _check_keys(cert_data, _CERT_KEYS, "'certificates'")
    for name, override in cert_data.items():
        _require(isinstance(override, dict), f"certificate {name!r} must be an object")
        _check_keys(override, set(DEFAULT_CERTIFICATES[name]), f"certificate {name!r}")
        certificates[name].update({k: float(v) for k, v in override.items()})

    target_h = float(data.get("target_h", 1.0 / 32.0))
    _require(target_h > 0, "target_h must be positive")
    epsilon = float(data.get("epsilon", 1e-6))
    _require(epsilon > 0, "epsilon must be positive")
    p = float(data.get("p", 2.0))
    _require(p >= 1, "p must be >= 1")

    return ExperimentConfig(
        graph_family=graph_family,
        graph_params=graph_params,
        graph_file=graph_file,
        target_h=target_h,
        problem=problem,
        p=p,
        potential=potential,
        density=density,
        weight=weight,
        cutoff_radius=cutoff_radius,
        testfn_overrides=testfn,
        solver=solver,
        initial=initial,
        r_list=r_list,
        epsilon=epsilon,
        certificates=certificates,
        output_dir=str(data.get("output_dir", "out")),
        raw=raw if raw is not None else data,
    )


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return parse_config(data, raw=data)


def _parse_potential(data: dict) -> PotentialSpec:
    _check_keys(data, {"kind", "V0", "theta", "k"}, "'potential'")
    _require("kind" in data and "V0" in data, "'potential' needs 'kind' and 'V0'")
    return PotentialSpec(
        kind=data["kind"],
        V0=float(data["V0"]),
        theta=float(data.get("theta", 2.0)),
        k=float(data.get("k", 1.0)),
    )


def _parse_density(data: dict) -> DensitySpec:
    _check_keys(data, {"kind", "rho0", "theta", "k"}, "'density'")
    _require("kind" in data and "rho0" in data, "'density' needs 'kind' and 'rho0'")
    return DensitySpec(
        kind=data["kind"],
        rho0=float(data["rho0"]),
        theta=float(data.get("theta", 2.0)),
        k=float(data.get("k", 1.0)),
    )


def _parse_weight(data: dict) -> WeightSpec:
    _check_keys(data, {"kind", "beta", "lambda", "k"}, "'weight'")
    _require("kind" in data, "'weight' needs 'kind'")
    return WeightSpec(
        kind=data["kind"],
        beta=float(data.get("beta", 1.0)),
        lam=float(data.get("lambda", 1.0)),
        k=float(data.get("k", 1.0)),
    )
