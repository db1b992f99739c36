"""Ensemble analysis for graph-based districting.

County-weighted ReCom chains over a precinct dual graph, per-plan partisan
and compactness metrics, and KS/autocorrelation diagnostics for choosing
sample sizes.
"""

from .chain import (
    ChainConfig,
    StepFailureError,
    StepOutcome,
    adjacent_district_pairs,
    balanced_cut,
    draw_edge_weights,
    make_rng,
    max_weight_spanning_tree,
    recom_step,
    run_chain,
)
from .diagnostics import (
    Ecdf,
    ExtremeRankReport,
    KsFit,
    MeasureDiagnostics,
    NonDecayingError,
    SampleSizeReport,
    autocorrelation,
    cross_chain_mean_se,
    decay_lag,
    extreme_rank_stats,
    fit_inverse_sqrt,
    ks_two_sample,
    pairwise_ks,
    prediction_interval,
    quantile,
    rank_percentiles,
    required_sample_size,
    sample_size_report,
)
from .graph import (
    DualGraph,
    Edge,
    GraphValidationError,
    Node,
    VoteCount,
    load_graph,
    merge_nodes,
    merge_small_counties,
    save_graph,
    validate_graph_file,
)
from .metrics import (
    COMPETITIVE_BAND,
    ElectionMetrics,
    MetricRecord,
    SwingSpec,
    UndefinedShareError,
    competitive_count,
    compute_record,
    county_splits,
    district_shares,
    plan_perimeter,
    seats,
    sorted_shares,
    statewide_share,
    two_party_share,
    uniform_swing,
)
from .partition import (
    BalanceSpec,
    InfeasibleSeedError,
    Plan,
    ideal_population,
    is_contiguous,
    max_deviation,
    plan_from_csv,
    read_plan_assignment,
    seed_plan,
    write_plan_csv,
)

__version__ = "0.1.0"
