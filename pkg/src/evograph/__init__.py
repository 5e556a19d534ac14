"""evograph: birth-death dynamics on superstar graphs.

Simulation engines, exact absorbing-chain oracles, and closed-form
fixation-probability bounds with a full finite-size error ledger.
"""

from .closedform import (
    AsymptoticBounds,
    BoundsReport,
    ErrorLedger,
    asymptotic_superstar_bounds,
    bounds_report,
    claimed_superstar_fixation,
    deleterious_upper_bound,
    diaz_upper_bound_h3,
    error_ledger,
    finite_superstar_bounds,
    martingale_absorption,
    moran_fixation,
    reservoir_growth_bias,
    star_fixation_approx,
)
from .dynamics import (
    Placement,
    PopulationState,
    Result,
    Rule,
    SimConfig,
    SimulationOutcome,
    place_initial_mutant,
    replacement_events,
    run_to_absorption,
    step,
)
from .exactchain import ExactFixation, exact_fixation, exact_transition_row
from .montecarlo import (
    EstimateReport,
    estimate_fixation,
    estimate_one_to_two,
    wilson_interval,
)
from .rng import StreamRNG, stream_key
from .topology import (
    GraphTopology,
    NodeRole,
    SuperstarSpec,
    build_family,
    build_raw,
    build_superstar,
    is_circulation,
    is_strongly_connected,
)
from .trainkinetics import (
    collision_probability_bound,
    expected_train_length,
    simulate_train,
    train_dp_oracle,
    train_length_bounds,
)

__version__ = "0.1.0"
