"""Metric-graph PDE toolkit: solvers, norms, and inequality certificates."""

from .errors import (
    BadParamsError,
    ConfigError,
    DisconnectedError,
    DuplicateEdgeError,
    GraphError,
    GridMismatchError,
    LoopEdgeError,
    NonPositiveDensityError,
    NonPositiveLengthError,
    QglError,
    SingularSystemError,
    SolverDivergedError,
    TimeNotOnGridError,
    UnknownVertexError,
)
from .graphs import (
    DegreeInfo,
    Edge,
    MetricGraph,
    Point,
    ball_indicator,
    binary_tree,
    build_graph,
    check_degree_condition,
    degree,
    distance,
    generate,
    load_graph,
    path_graph,
    save_graph,
    star_graph,
    truncated_ray,
)
from .mesh import (
    GraphFunction,
    Grid,
    assemble_mass,
    assemble_stiffness,
    build_grid,
    integrate,
    integrate_ball,
    per_edge_norm_sum,
    weighted_lp_norm,
)
from .fields import (
    CutoffSpec,
    DensitySpec,
    FieldValues,
    PotentialSpec,
    TestFnSpec,
    WeightSpec,
    eval_cutoff,
    eval_test_function,
    eval_weight,
    make_density,
    make_potential,
    sample_weight,
    smooth_abs_power,
    smooth_abs_power_half,
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
from .checks import (
    CheckReport,
    GrowthProfile,
    UniquenessResult,
    check_elliptic_energy,
    check_elliptic_energy_low_p,
    check_exp_elliptic,
    check_exp_parabolic,
    check_parabolic_energy,
    check_parabolic_energy_low_p,
    check_poly_elliptic,
    check_poly_parabolic,
    elliptic_weight_thresholds,
    growth_profile,
    uniqueness_experiment,
)

__version__ = "0.1.0"
