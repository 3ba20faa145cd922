"""Deterministic simulator of broker-mediated wavelength markets.

Competing optical transport networks bid to carry point-to-point
wavelength demand aggregated by a broker; prices fall through a stochastic
undercutting race and the winner provisions capacity through an exact
minimum-cost routing and wavelength assignment core.
"""

from ._kernel import BACKEND as kernel_backend
from .cost import CostCurve, CurveSegment, marginal_cost, total_cost_curve
from .errors import (
    ConfigError,
    ConflictError,
    DegenerateMarketError,
    EmptyCurveError,
    InfeasibleError,
    InstanceTooLargeError,
    InvalidOutcomeError,
    NetworkTooLargeError,
    NoPathError,
    ParseError,
    RoundCapExceededError,
    UnknownNetworkError,
    Violation,
    WavebrokerError,
)
from .game import (
    Bid,
    EquilibriumBound,
    Pass,
    SupplierAgent,
    UndercutPolicy,
    decide_bid,
    equilibrium_bounds,
    sample_undercut,
)
from .market import (
    ChannelConfig,
    ConstantElasticityDemand,
    LinearDemand,
    ProfitLedger,
    Report,
    ScenarioConfig,
    SettlementResult,
    SupplierConfig,
    broker_demand,
    child_seed,
    profit_percentages,
    run_scenario,
    run_sweep,
    settle,
)
from .protocol import (
    BrokerAgent,
    CompetitionOutcome,
    CompetitionTrace,
    Termination,
    TraceEvent,
    run_competition,
    validate_trace,
)
from .rwa import (
    Allocation,
    LightPath,
    RwaSolution,
    apply_delta,
    brute_force_rwa,
    dump_allocation,
    incremental_allocate,
    solve_min_cost_rwa,
    validate_allocation,
)
from .topology import (
    DemandRequest,
    Link,
    Network,
    VirtualChannel,
    make_network,
    path_cost,
    route_candidates,
    validate_network,
)

__version__ = "0.1.0"
