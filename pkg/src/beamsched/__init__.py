"""Resilience-aware beam scheduling for mmWave relay networks."""

__version__ = "0.1.0"

from .network import (
    BlockageRealization,
    EMPTY_BLOCKAGE,
    InvalidPathError,
    Link,
    Network,
    Path,
    Schedule,
    delivered_rate,
    enumerate_paths,
    load_network,
    load_paths,
    path_capacity,
    path_success,
    save_network,
    save_paths,
    validate_schedule,
)
from .simplex import LinearProgram, LpSolution, format_lp, solve_lp
from .rates import (
    EdgeDisjointSolution,
    PatternBudgetError,
    RateSolution,
    TradeoffEntry,
    approx_capacity,
    edge_disjoint_worst_case,
    feasibility_schedule,
    min_rate_under_blockage,
    optimal_average,
    optimal_worst_case,
    plain_lp_average_rate,
    rate_statistics,
    schedule_to_csv,
    tradeoff_curve,
    tradeoff_to_csv,
)
from .selection import (
    CandidateSelection,
    build_candidate_paths,
    candidate_paths_from_probes,
    select_best_path,
    select_paths,
)
from .generation import (
    GenConfig,
    GeneratedNetwork,
    MissingCoordinatesError,
    assign_blockage,
    generate_topology,
    resample_capacities,
    sample_blockage,
    sample_intensities,
)
from .env import (
    EnvConfig,
    MalformedActionError,
    PathInfo,
    RateEnv,
    StepOutcome,
    avg_training_rate,
    epoch_blockage,
    episode_network,
    evaluation_rollup,
    load_env_config,
    metrics_to_csv,
    pick_hc_paths,
    pick_rs_paths,
    run_baseline_static,
    save_env_config,
)
from .server import EnvServer, ProtocolSession, encode, serve_stdio, serve_tcp, start_server_thread
