"""Non-backtracking random walks on two-community configuration-model graphs."""
__version__ = "0.1.0"

from .model import (  # noqa: E402
    CommunitySpec,
    DegreeLaw,
    PairedGraph,
    RegimeThresholds,
    SpecError,
    generate_graph,
    sample_degree_sequence,
    validate_spec,
)
from .theory import (  # noqa: E402
    SurrogateChain,
    clt_check,
    compute_stats,
    coupling_budget,
    predict,
    spectral_gap,
    surrogate_occupancy_closed_form,
    surrogate_sample,
)
from .walk import (  # noqa: E402
    build_operator,
    community_occupancy,
    conductance,
    distance_profile,
    estimate_tmix,
    evolve,
    root_fraction,
    sample_trajectory,
    tv_distance,
)
