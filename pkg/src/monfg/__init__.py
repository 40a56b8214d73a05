"""Multi-objective normal-form games: equilibria under ESR and SER, CE
computation, grid scans, and seeded learning experiments."""

from .core import (
    MONFG,
    CorrelatedStrategy,
    LinearUtility,
    MixedStrategy,
    PolySumUtility,
    ProductUtility,
    StrategyModification,
    StrategyProfile,
    ThresholdUtility,
    UtilitySpec,
    conditional_expected_payoff,
    esr_value,
    esr_value_correlated,
    expected_payoff_correlated,
    expected_payoff_modified,
    expected_payoff_profile,
    ser_value,
    utility_eval,
    utility_grad,
)
from .equilibrium import (
    EquilibriumReport,
    GridScanResult,
    best_response_ser,
    scan_ne_ser_grid,
    solve_ce_esr,
    tradeoff_game,
    verify_ce_esr,
    verify_ce_ser_multi,
    verify_ce_ser_single,
    verify_ne_esr,
    verify_ne_ser,
)
from .learning import (
    AgentState,
    ExperimentConfig,
    ExperimentMetrics,
    SignalMode,
    optimal_mixed_strategy,
    q_update,
    run_experiment,
    run_trial,
    select_action,
    write_metrics,
)
from .optim import (
    LinearProgram,
    MixtureObjective,
    OptConfig,
    finite_difference_grad,
    maximize_over_simplex,
    project_to_simplex,
    simplex_grid,
    solve_lp,
)

__all__ = [name for name in dir() if not name.startswith("_")]
