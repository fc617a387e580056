"""Universal ARMA graph filters.

Rational graph-frequency responses designed once for a spectral interval,
executed as distributed per-node recursions, and verified against dense
spectral oracles.
"""

from .design import (
    Arma1,
    DesignResult,
    FirDesign,
    ParallelForm,
    PeriodicForm,
    RationalDesign,
    StabilityReport,
    check_stability_rational,
    chebyshev_prefit,
    design_arma,
    design_fir,
    evaluate_response,
    fir_l2_error,
    random_stable_design,
    shank_step1_denominator,
    shank_step2_numerator,
    to_arma1,
    to_parallel,
    to_periodic,
)
from .errors import (
    ConvergenceError,
    DesignError,
    GraphFilterError,
    InputError,
    SpectralIntervalWarning,
    StabilityError,
)
from .graphs import (
    Graph,
    GraphSignal,
    cycle_graph,
    complete_graph,
    disk_graph,
    path_graph,
    random_geometric_graph,
    random_weighted_graph,
)
from .responses import (
    DesiredResponse,
    MuResponse,
    map_to_mu,
    sampled_response,
    step_response,
    window_response,
)
from .spectral import (
    MeasuredResponse,
    ShiftOperator,
    Spectrum,
    apply_filter_exact,
    build_shift_operator,
    eigendecompose,
    gft_forward,
    gft_inverse,
    measure_response,
)
from .engine import (
    AccountingReport,
    FilterEngine,
    GraphTables,
    RoundMessage,
    SimulationConfig,
    Trace,
    accounting_report,
    constant_signal,
    contraction_ratio,
    degree_signal,
    rounds_for_tolerance,
    run_arma1,
    run_filter,
    run_fir,
    run_parallel,
    run_periodic,
    simulate,
    sinusoid_signal,
    steady_state,
    step_time_varying,
    switch_signal,
)
from .temporal import (
    GainMeasurement,
    JointResponse,
    arma1_transfer,
    measure_temporal_gain,
    parallel_transfer,
    periodic_transfer,
    response_surface,
)
from .mobility import DiskGraphConfig, RandomWaypoint, WaypointConfig
from .experiments import (
    ExperimentResult,
    experiment_convergence,
    experiment_mobility,
    experiment_response_fit,
)

__version__ = "0.1.0"
