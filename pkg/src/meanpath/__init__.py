"""Minimum average edge-length paths and sparse tours through random points.

Simulation and optimization toolkit: reproducible Poisson/uniform point
clouds, exact subset-DP solvers for small instances, scalable local search
and parametric ratio search, closed-form and finite-size bounds, and Monte
Carlo estimators with replicate statistics.
"""

__version__ = "0.1.0"

from .points import (
    LOWER_CORNER,
    UPPER_CORNER,
    PointSet,
    Provenance,
    Region,
    path_length,
    read_points_csv,
    sample_poisson,
    sample_uniform,
    stream,
)
from .exact import (
    DEFAULT_CAP,
    CapacityError,
    CycleSolution,
    InfeasibleError,
    PathSolution,
    RatioPath,
    exact_all_k_cycles,
    exact_diagonal_ratio,
    exact_k_cycle,
    exact_origin_path,
    uniform_boundedness_constant,
)
from .search import (
    DinkelbachState,
    SearchOptions,
    UnsupportedDimensionError,
    concatenate_paths,
    dinkelbach_ratio_path,
    greedy_diagonal,
    greedy_length_constant,
    local_search_k_cycle,
    local_search_origin_path,
    oriented_path_search,
)
from .bounds import BoundResult, brw_lower_bound, finite_s_upper_bound, unit_ball_volume
from .estimate import (
    CurveEstimate,
    EstimateRecord,
    FitResult,
    convexity_check,
    estimate_c_delta,
    estimate_lnm,
    estimate_oriented,
    estimate_t,
    estimate_w,
    fit_scaling_exponent,
    monotonicity_check,
)

__all__ = [name for name in dir() if not name.startswith("_")]
