"""Discrete solvers on truncated graphs, plus vertex-flux diagnostics.

The elliptic equation (second derivative balancing a potential term) and the
density-weighted heat equation are both discretized with the operators from
:mod:`qgl.mesh`.  Truncation vertices can carry Dirichlet values; everything
else gets the natural vanishing-flux condition for free.  Each solve owns
its operators and runs single-threaded; independent solves may run
concurrently, and emitted snapshots are immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import linalg as spla

from .errors import (
    BadParamsError,
    SingularSystemError,
    SolverDivergedError,
    TimeNotOnGridError,
    UnknownVertexError,
)
from .graphs import MetricGraph
from .mesh import (
    GraphFunction,
    Grid,
    assemble_mass,
    assemble_stiffness,
    integrate,
)

_RESIDUAL_LIMIT = 1e-10


@dataclass
class EllipticProblem:
    """Stationary problem: potential term against the graph Laplacian.

    ``dirichlet`` maps truncation vertex ids to pinned values; every vertex
    not listed keeps the natural condition.  ``rhs`` extends the homogeneous
    equation with a source for oracle testing.
    """

    graph: MetricGraph
    grid: Grid
    potential: GraphFunction | None = None
    rhs: GraphFunction | None = None
    dirichlet: dict[int, float] = field(default_factory=dict)


@dataclass
class ParabolicProblem:
    """Heat flow with a variable density, from ``initial`` up to ``t_final``."""

    graph: MetricGraph
    grid: Grid
    density: GraphFunction | None
    initial: GraphFunction
    t_final: float
    dt: float
    scheme: str = "implicit_euler"
    dirichlet: dict[int, float] = field(default_factory=dict)


class Trajectory:
    """Snapshots of a time-dependent solution at every multiple of dt."""

    def __init__(self, grid: Grid, times, values):
        self.grid = grid
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.values.shape != (self.times.size, grid.n_unknowns):
            raise BadParamsError("trajectory values shape does not match times/grid")

    def __len__(self) -> int:
        return self.times.size

    def state(self, i: int) -> GraphFunction:
        return GraphFunction(self.grid, self.values[i], time=float(self.times[i]))

    def snapshot_index(self, t: float) -> int:
        """Index of the snapshot at time ``t`` (must lie on the time grid)."""
        hits = np.nonzero(np.abs(self.times - t) <= 1e-9 * max(1.0, abs(t)))[0]
        if hits.size == 0:
            raise TimeNotOnGridError(f"time {t} is not a snapshot time")
        return int(hits[0])

    def final(self) -> GraphFunction:
        return self.state(len(self) - 1)


def _check_dirichlet_vertices(graph: MetricGraph, dirichlet: dict[int, float]):
    for v in dirichlet:
        if not graph.has_vertex(v):
            raise UnknownVertexError(f"Dirichlet vertex {v} not in graph")


def _pinned_rows(grid: Grid, dirichlet: dict[int, float]) -> list[tuple[int, float]]:
    """(global row, value) pairs of the pinned vertices, in row order."""
    return sorted((grid.vertex_index[v], float(val)) for v, val in dirichlet.items())


def _substitute_dirichlet(matrix, pinned: list[tuple[int, float]]):
    """Replace the rows of pinned vertices with identity rows."""
    if not pinned:
        return matrix.tocsc()
    lil = matrix.tolil()
    for r, _ in pinned:
        lil.rows[r] = [r]
        lil.data[r] = [1.0]
    return lil.tocsc()


def _factorize(matrix):
    try:
        return spla.splu(matrix)
    except RuntimeError as exc:
        raise SingularSystemError(f"sparse factorization failed: {exc}") from None


def _check_residual(matrix, x, b):
    r = matrix @ x - b
    scale = max(
        float(np.linalg.norm(b)),
        float(abs(matrix).sum(axis=1).max()) * float(np.linalg.norm(x)),
        1e-300,
    )
    rel = float(np.linalg.norm(r)) / scale
    if rel > _RESIDUAL_LIMIT:
        raise SolverDivergedError(f"linear solve residual {rel:.3e} above 1e-10")


def solve_elliptic(problem: EllipticProblem) -> GraphFunction:
    """Solve the stationary equation with Dirichlet rows substituted.

    Assembles ``stiffness + potential-weighted mass`` and a mass-weighted
    right-hand side.  With no Dirichlet vertex and an identically zero
    potential the operator is singular; the system is then solvable only for
    zero-mean sources, and the returned solution is grounded to zero at the
    root (all other solutions differ by a constant).
    """
    graph, grid = problem.graph, problem.grid
    _check_dirichlet_vertices(graph, problem.dirichlet)
    if problem.potential is not None and np.any(problem.potential.values < 0.0):
        raise BadParamsError("potential must be nonnegative")
    stiffness = assemble_stiffness(graph, grid)
    mass = assemble_mass(graph, grid)
    system = stiffness.copy()
    if problem.potential is not None:
        system = system + assemble_mass(graph, grid, problem.potential)
    b = np.zeros(grid.n_unknowns)
    if problem.rhs is not None:
        b = mass @ problem.rhs.values

    dirichlet = dict(problem.dirichlet)
    coercive = problem.potential is not None and np.any(problem.potential.values > 0.0)
    if not dirichlet and not coercive:
        source_mean = float(np.ones(grid.n_unknowns) @ b)
        if abs(source_mean) > 1e-10 * max(1.0, float(np.abs(b).sum())):
            raise SingularSystemError(
                f"pure natural problem with zero potential needs a zero-mean "
                f"source; got mean {source_mean:.3e}"
            )
        dirichlet = {graph.root: 0.0}

    pinned = _pinned_rows(grid, dirichlet)
    system = _substitute_dirichlet(system, pinned)
    for r, val in pinned:
        b[r] = val
    lu = _factorize(system)
    x = lu.solve(b)
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("solution contains non-finite values")
    _check_residual(system, x, b)
    return GraphFunction(grid, x)


def solve_heat(problem: ParabolicProblem) -> Trajectory:
    """March the heat equation and return every snapshot.

    Implicit Euler solves ``(M + dt A) u_next = M u``; Crank-Nicolson solves
    ``(M + dt/2 A) u_next = (M - dt/2 A) u``.  The system matrix is constant
    in time, so it is factorized once.  Dirichlet rows are substituted at
    every step.
    """
    graph, grid = problem.graph, problem.grid
    _check_dirichlet_vertices(graph, problem.dirichlet)
    if problem.scheme not in ("implicit_euler", "crank_nicolson"):
        raise BadParamsError(f"unknown scheme {problem.scheme!r}")
    if not (problem.dt > 0 and problem.t_final > 0 and problem.dt <= problem.t_final):
        raise BadParamsError(
            f"need 0 < dt <= t_final, got dt={problem.dt}, t_final={problem.t_final}"
        )
    n_steps = round(problem.t_final / problem.dt)
    if abs(n_steps * problem.dt - problem.t_final) > 1e-9 * max(1.0, problem.t_final):
        raise BadParamsError("t_final must be an integer multiple of dt")

    stiffness = assemble_stiffness(graph, grid)
    mass = assemble_mass(graph, grid, problem.density)
    if problem.scheme == "implicit_euler":
        lhs = mass + problem.dt * stiffness
        rhs_op = mass
    else:
        lhs = mass + (0.5 * problem.dt) * stiffness
        rhs_op = mass - (0.5 * problem.dt) * stiffness
    pinned = _pinned_rows(grid, problem.dirichlet)
    lhs = _substitute_dirichlet(lhs, pinned)
    lu = _factorize(lhs)

    values = np.empty((n_steps + 1, grid.n_unknowns))
    values[0] = problem.initial.values
    u = problem.initial.values.copy()
    for step in range(1, n_steps + 1):
        b = rhs_op @ u
        for r, val in pinned:
            b[r] = val
        u = lu.solve(b)
        if not np.all(np.isfinite(u)):
            raise SingularSystemError(f"non-finite values at step {step}")
        values[step] = u
    times = np.arange(n_steps + 1) * problem.dt
    return Trajectory(grid, times, values)


def kirchhoff_residual(grid: Grid, u: GraphFunction, v: int) -> float:
    """Sum over incident edges of the derivative of ``u`` away from ``v``.

    Uses second-order one-sided stencils (first order on two-node edges),
    written in difference form so constants give exactly zero.  Sign
    convention: the derivative of each restriction is taken in the direction
    leaving the vertex into the edge, so a function increasing away from
    ``v`` on all incident edges has positive residual.  The vanishing of
    this sum is the vertex transmission condition; at pendant vertices it is
    the Neumann condition.
    """
    graph = grid.graph
    if not graph.has_vertex(v):
        raise UnknownVertexError(f"vertex {v} not in graph")
    total = 0.0
    for e in graph.edges:
        if v not in (e.src, e.dst):
            continue
        vals = u.values[grid.edge_nodes(e.id)]
        if e.dst == v:
            vals = vals[::-1]
        h = grid.edge_h[e.id]
        if vals.size >= 3:
            total += (3.0 * (vals[1] - vals[0]) + (vals[1] - vals[2])) / (2.0 * h)
        else:
            total += (vals[1] - vals[0]) / h
    return total


def exact_ray_solution(v0: float, grid: Grid) -> GraphFunction:
    """Radial ``cosh(sqrt(v0) * distance)`` profile on a grid.

    On a chain rooted at one end this solves the constant-potential
    stationary equation with zero derivative at the root, and is the
    reference whose growth exceeds every admissible weight class.
    """
    if not v0 > 0:
        raise BadParamsError(f"potential level must be positive, got {v0}")
    rate = math.sqrt(v0)
    return GraphFunction.from_distance_profile(grid, lambda d: np.cosh(rate * d))


def mass_functional(grid: Grid, density: GraphFunction | None, u) -> float:
    """Total density-weighted content of ``u`` (conserved by natural flow)."""
    rho = density.values if density is not None else None
    return integrate(grid, u, w=rho)
