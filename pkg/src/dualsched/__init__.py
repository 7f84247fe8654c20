"""Joint link scheduling, routing, and rate control by dual price iteration.

The pieces compose in layers: network model and K-hop interference
(`model`), schedulers over a shared priority order (`scheduling`,
`distributed`), price-metric routing and source rates (`routing`), the
price iteration with its diagnostics and optimality brackets (`solver`),
and property verification on random instances (`verify`).
"""

__version__ = "0.1.0"

from .config import LoadedConfig, load_config
from .distributed import (
    LinkState,
    Trace,
    init_sim,
    render_trace,
    run_distributed_greedy,
    step_round,
    trace_csv_rows,
)
from .errors import (
    CapacityError,
    ConfigError,
    DualschedError,
    InputError,
    InternalInvariantError,
    RoutingError,
    SimStateError,
)
from .model import (
    ENUMERATION_GUARD,
    UNREACHABLE,
    Flow,
    IndependentSetCollection,
    Link,
    Network,
    enumerate_maximal_independent_sets,
    interference_degree_graph,
    interference_degree_link,
    interference_set,
    is_valid_k_matching,
    link_distance,
)
from .netgen import random_connected_network, random_prices
from .routing import FlowAllocation, least_priced_path, solve_d1, source_rate
from .scheduling import (
    TIE_ASCENDING_ID,
    TIE_REVERSED_ID,
    ScheduleSet,
    centralized_greedy,
    optimal_schedule,
    priority_order,
    schedule_weight,
)
from .solver import (
    MODE_DISTRIBUTED,
    MODE_GREEDY,
    MODE_OPTIMAL,
    MODES,
    BandReport,
    DualBracket,
    DualEvaluation,
    FeasibilityReport,
    SolverConfig,
    SolverTrajectory,
    analytic_subgradient_bound,
    bracket_dual_optimum,
    cesaro_report,
    evaluate_dual,
    price_update,
    primal_feasibility_check,
    run_solver,
)
from .utility import LOG1P, QUADRATIC, UTILITY_KINDS, UtilityFunction
from .verify import PropertyCheck, make_instances, run_verification

__all__ = [
    "__version__",
    "BandReport",
    "CapacityError",
    "ConfigError",
    "DualBracket",
    "DualEvaluation",
    "DualschedError",
    "ENUMERATION_GUARD",
    "FeasibilityReport",
    "Flow",
    "FlowAllocation",
    "IndependentSetCollection",
    "InputError",
    "InternalInvariantError",
    "Link",
    "LinkState",
    "LoadedConfig",
    "LOG1P",
    "MODE_DISTRIBUTED",
    "MODE_GREEDY",
    "MODE_OPTIMAL",
    "MODES",
    "Network",
    "PropertyCheck",
    "QUADRATIC",
    "RoutingError",
    "ScheduleSet",
    "SimStateError",
    "SolverConfig",
    "SolverTrajectory",
    "TIE_ASCENDING_ID",
    "TIE_REVERSED_ID",
    "Trace",
    "UNREACHABLE",
    "UTILITY_KINDS",
    "UtilityFunction",
    "analytic_subgradient_bound",
    "bracket_dual_optimum",
    "centralized_greedy",
    "cesaro_report",
    "enumerate_maximal_independent_sets",
    "evaluate_dual",
    "init_sim",
    "interference_degree_graph",
    "interference_degree_link",
    "interference_set",
    "is_valid_k_matching",
    "least_priced_path",
    "link_distance",
    "load_config",
    "make_instances",
    "optimal_schedule",
    "price_update",
    "primal_feasibility_check",
    "priority_order",
    "random_connected_network",
    "random_prices",
    "render_trace",
    "run_distributed_greedy",
    "run_solver",
    "run_verification",
    "schedule_weight",
    "solve_d1",
    "source_rate",
    "step_round",
    "trace_csv_rows",
]
