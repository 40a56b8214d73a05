"""Equilibrium verification and computation for MONFGs under ESR and SER.

Five concepts are checked exactly against their defining inequalities:

* Nash under ESR: pure unilateral deviations suffice because the expected
  scalarised return is linear in a player's own mixing probabilities.
* Nash under SER: the deviation oracle is a full mixed-strategy best response
  (vertex enumeration plus seeded multi-start projected-gradient ascent).
* Correlated under ESR: per-recommendation pairwise swap inequalities on the
  scalarised trade-off game; swaps are equivalent to arbitrary strategy
  modifications because the objective is linear in the joint distribution.
* Single-signal correlated under SER: per delivered recommendation, no
  alternative response improves the utility of the conditional expectation.
  Zero-probability recommendations are vacuously satisfied.
* Multi-signal correlated under SER: exhaustive enumeration of all pure
  strategy modifications (the utility is nonlinear in the marginalised
  expectation, so swaps do not suffice).

Every report carries a per-player worst-case deviation gain together with a
witness that reproduces that gain when re-evaluated independently.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    MONFG,
    CorrelatedStrategy,
    MixedStrategy,
    StrategyModification,
    StrategyProfile,
    UtilitySpec,
    conditional_expected_payoff,
    conditional_payoff_matrix,
    esr_value,
    esr_value_correlated,
    expected_payoff_correlated,
    expected_payoff_modified,
    expected_payoff_profile,
    utility_eval,
    utility_values,
)
from .errors import GridTooLarge, ShapeMismatch, SolverError, TooManyModifications
from .optim import (
    LinearProgram,
    MixtureObjective,
    OptConfig,
    maximize_over_simplex,
    simplex_grid,
    solve_lp,
)

DEFAULT_TOL = 1e-6
MODIFICATION_CAP = 10**6
DEFAULT_PROFILE_CAP = 2 * 10**6


# ---------------------------------------------------------------------------
# Reports and witnesses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PureDeviation:
    """Witness: deviate to a single pure action."""

    player: int
    action: int


@dataclass(frozen=True)
class MixedDeviation:
    """Witness: deviate to a mixed strategy."""

    player: int
    strategy: MixedStrategy


@dataclass(frozen=True)
class RecommendationSwap:
    """Witness: answer one recommendation with a different action."""

    player: int
    recommended: int
    response: int


Witness = PureDeviation | MixedDeviation | RecommendationSwap | StrategyModification


@dataclass(frozen=True)
class PlayerReport:
    max_gain: float
    witness: Witness
    value_at_candidate: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "max_gain", float(self.max_gain))
        object.__setattr__(self, "value_at_candidate", float(self.value_at_candidate))


@dataclass(frozen=True)
class EquilibriumReport:
    verdict: bool
    tolerance: float
    players: tuple[PlayerReport, ...]

    @property
    def max_gain(self) -> float:
        return max(p.max_gain for p in self.players)


def _finish(players: list[PlayerReport], tol: float) -> EquilibriumReport:
    verdict = bool(max(p.max_gain for p in players) <= tol)
    return EquilibriumReport(verdict=verdict, tolerance=float(tol), players=tuple(players))


def _check_utilities(game: MONFG, utilities: Sequence[UtilitySpec]) -> tuple[UtilitySpec, ...]:
    utilities = tuple(utilities)
    if len(utilities) != game.num_players:
        raise ShapeMismatch(
            f"got {len(utilities)} utilities for {game.num_players} players"
        )
    return utilities


# ---------------------------------------------------------------------------
# Trade-off reduction
# ---------------------------------------------------------------------------


def tradeoff_game(game: MONFG, utilities: Sequence[UtilitySpec]) -> MONFG:
    """Single-objective game with payoffs u_i composed with the payoff vectors.

    Under ESR the original game and its trade-off game have the same
    equilibria, so all single-objective theory applies to the reduction.
    """
    utilities = _check_utilities(game, utilities)
    n = game.num_players
    out = np.empty(game.action_counts + (n, 1))
    for cell in np.ndindex(*game.action_counts):
        for i, u in enumerate(utilities):
            out[cell + (i, 0)] = utility_eval(u, game.payoffs[cell + (i,)])
    return MONFG(out, action_labels=game.action_labels)


# ---------------------------------------------------------------------------
# Nash equilibria
# ---------------------------------------------------------------------------


def verify_ne_esr(
    game: MONFG,
    utilities: Sequence[UtilitySpec],
    profile: StrategyProfile,
    tol: float = DEFAULT_TOL,
) -> EquilibriumReport:
    """Check the Nash condition under expected scalarised returns.

    Pure deviations are exhaustive here: the ESR value is linear in the
    deviating player's own probabilities, so some pure action attains the
    best-response value.
    """
    utilities = _check_utilities(game, utilities)
    players = []
    for i, u in enumerate(utilities):
        base = esr_value(game, profile, i, u)
        best_gain = -math.inf
        best_action = 0
        for a in range(game.action_counts[i]):
            deviated = profile.replace(i, MixedStrategy.pure(game.action_counts[i], a))
            gain = esr_value(game, deviated, i, u) - base
            if gain > best_gain:
                best_gain = gain
                best_action = a
        players.append(
            PlayerReport(
                max_gain=max(best_gain, 0.0),
                witness=PureDeviation(player=i, action=best_action),
                value_at_candidate=base,
            )
        )
    return _finish(players, tol)


def best_response_ser(
    game: MONFG,
    utility: UtilitySpec,
    player: int,
    opponents: Sequence[MixedStrategy],
    opt: OptConfig | None = None,
) -> tuple[MixedStrategy, float]:
    """Best mixed strategy for ``player`` against fixed opponent mixing, by SER.

    The attainable expected payoff vectors form the convex hull of the
    per-action conditional vectors, so the search maximizes the utility of a
    mixture of those rows. Vertex evaluation is exhaustive; interior optima
    are found by the seeded multi-start ascent.
    """
    V = conditional_payoff_matrix(game, player, opponents)
    point, value = maximize_over_simplex(
        MixtureObjective(V, utility), None, V.shape[0], opt
    )
    return MixedStrategy(point), float(value)


def verify_ne_ser(
    game: MONFG,
    utilities: Sequence[UtilitySpec],
    profile: StrategyProfile,
    tol: float = DEFAULT_TOL,
    opt: OptConfig | None = None,
) -> EquilibriumReport:
    """Check the Nash condition under scalarised expected returns.

    Each player's gain is the best-response SER value minus the utility of the
    candidate's expected payoff vector. The reported gain of the winning
    deviation is re-derived through the exact expectation path so the witness
    reproduces it independently.
    """
    utilities = _check_utilities(game, utilities)
    players = []
    for i, u in enumerate(utilities):
        base = utility_eval(u, expected_payoff_profile(game, profile, i))
        opponents = [profile[j] for j in range(game.num_players) if j != i]
        strategy, _ = best_response_ser(game, u, i, opponents, opt)
        value = utility_eval(
            u, expected_payoff_profile(game, profile.replace(i, strategy), i)
        )
        gain = value - base
        if gain <= 0.0:
            gain = 0.0
            strategy = profile[i]
        players.append(
            PlayerReport(
                max_gain=gain,
                witness=MixedDeviation(player=i, strategy=strategy),
                value_at_candidate=base,
            )
        )
    return _finish(players, tol)


# ---------------------------------------------------------------------------
# Correlated equilibria
# ---------------------------------------------------------------------------


def _scalarised_tables(game: MONFG, utilities: Sequence[UtilitySpec]) -> np.ndarray:
    """f[i][cell] = u_i(p_i(cell)), shape (n,) + action_counts."""
    n = game.num_players
    out = np.empty((n,) + game.action_counts)
    for cell in np.ndindex(*game.action_counts):
        for i, u in enumerate(utilities):
            out[(i,) + cell] = utility_eval(u, game.payoffs[cell + (i,)])
    return out


def verify_ce_esr(
    game: MONFG,
    utilities: Sequence[UtilitySpec],
    sigma: CorrelatedStrategy,
    tol: float = DEFAULT_TOL,
) -> EquilibriumReport:
    """Check the correlated-equilibrium condition under ESR.

    For every player and every ordered action pair (a, b) the recommendation-a
    mass must not prefer playing b. Because the ESR objective is linear in the
    joint distribution, these swap constraints are equivalent to quantifying
    over all strategy modifications.
    """
    utilities = _check_utilities(game, utilities)
    if sigma.action_counts != game.action_counts:
        raise ShapeMismatch("correlated strategy shape does not match the game")
    f = _scalarised_tables(game, utilities)
    players = []
    for i in range(game.num_players):
        k = game.action_counts[i]
        fi = np.moveaxis(f[i], i, 0).reshape(k, -1)
        mass = np.moveaxis(sigma.probs, i, 0).reshape(k, -1)
        best_gain = 0.0
        witness: StrategyModification = StrategyModification.identity(i, k)
        for a in range(k):
            row = mass[a]
            if not row.any():
                continue
            base = float(row @ fi[a])
            for b in range(k):
                if b == a:
                    continue
                gain = float(row @ fi[b]) - base
                if gain > best_gain:
                    best_gain = gain
                    witness = StrategyModification.swap(i, k, a, b)
        players.append(
            PlayerReport(
                max_gain=best_gain,
                witness=witness,
                value_at_candidate=esr_value_correlated(game, sigma, i, utilities[i]),
            )
        )
    return _finish(players, tol)


def verify_ce_ser_single(
    game: MONFG,
    utilities: Sequence[UtilitySpec],
    sigma: CorrelatedStrategy,
    tol: float = DEFAULT_TOL,
) -> EquilibriumReport:
    """Check the single-signal correlated-equilibrium condition under SER.

    For every recommendation that is actually delivered (positive marginal),
    no alternative response may beat the utility of the conditional expected
    payoff of following it. The candidate value reported per player is the
    marginal-weighted utility of following each recommendation.
    """
    utilities = _check_utilities(game, utilities)
    if sigma.action_counts != game.action_counts:
        raise ShapeMismatch("correlated strategy shape does not match the game")
    players = []
    for i, u in enumerate(utilities):
        k = game.action_counts[i]
        marginal = sigma.marginal(i)
        best_gain = -math.inf
        witness = None
        value = 0.0
        for rec in range(k):
            if marginal[rec] <= 0.0:
                continue
            base = utility_eval(
                u, conditional_expected_payoff(game, sigma, i, rec, rec)
            )
            value += float(marginal[rec]) * base
            for resp in range(k):
                gain = (
                    utility_eval(
                        u, conditional_expected_payoff(game, sigma, i, rec, resp)
                    )
                    - base
                )
                if gain > best_gain:
                    best_gain = gain
                    witness = RecommendationSwap(player=i, recommended=rec, response=resp)
        if witness is None:
            raise ShapeMismatch(f"player {i} has no recommendation with positive mass")
        players.append(
            PlayerReport(max_gain=best_gain, witness=witness, value_at_candidate=value)
        )
    return _finish(players, tol)


def verify_ce_ser_multi(
    game: MONFG,
    utilities: Sequence[UtilitySpec],
    sigma: CorrelatedStrategy,
    tol: float = DEFAULT_TOL,
) -> EquilibriumReport:
    """Check the multi-signal correlated-equilibrium condition under SER.

    All ``k**k`` pure strategy modifications per player are enumerated; the
    utility is applied to the expectation marginalised over recommendations,
    so per-recommendation swaps are not sufficient here.
    """
    utilities = _check_utilities(game, utilities)
    if sigma.action_counts != game.action_counts:
        raise ShapeMismatch("correlated strategy shape does not match the game")
    players = []
    for i, u in enumerate(utilities):
        k = game.action_counts[i]
        if k**k > MODIFICATION_CAP:
            raise TooManyModifications(
                f"player {i} has {k}**{k} strategy modifications, above cap {MODIFICATION_CAP}"
            )
        base_vec = expected_payoff_correlated(game, sigma, i)
        base = utility_eval(u, base_vec)
        # contributions[r, b] = sum over others of sigma(r, a_-i) * p_i(b, a_-i)
        contributions = np.zeros((k, k, game.num_objectives))
        for cell in np.ndindex(*game.action_counts):
            w = sigma.probs[cell]
            if w == 0.0:
                continue
            played = list(cell)
            for b in range(k):
                played[i] = b
                contributions[cell[i], b] += w * game.payoffs[tuple(played) + (i,)]
        best_gain = -math.inf
        best_map: tuple[int, ...] | None = None
        for mapping in itertools.product(range(k), repeat=k):
            vec = np.zeros(game.num_objectives)
            for r in range(k):
                vec += contributions[r, mapping[r]]
            gain = utility_eval(u, vec) - base
            if gain > best_gain:
                best_gain = gain
                best_map = mapping
        witness = StrategyModification(player=i, mapping=best_map)
        # Re-derive the winning gain through the exact expectation path so the
        # witness reproduces the report.
        gain = utility_eval(u, expected_payoff_modified(game, sigma, witness)) - base
        players.append(
            PlayerReport(max_gain=gain, witness=witness, value_at_candidate=base)
        )
    return _finish(players, tol)


# ---------------------------------------------------------------------------
# CE computation under ESR (linear programming)
# ---------------------------------------------------------------------------


def ce_esr_constraints(
    game: MONFG, utilities: Sequence[UtilitySpec]
) -> tuple[np.ndarray, np.ndarray]:
    """Swap inequality matrix A (A @ sigma_flat >= 0) and scalarised tables."""
    utilities = _check_utilities(game, utilities)
    f = _scalarised_tables(game, utilities)
    m = game.num_joint_actions
    rows = []
    for i in range(game.num_players):
        k = game.action_counts[i]
        for a in range(k):
            for b in range(k):
                if a == b:
                    continue
                coeff = np.zeros(game.action_counts)
                idx_a = [slice(None)] * game.num_players
                idx_a[i] = a
                idx_b = [slice(None)] * game.num_players
                idx_b[i] = b
                coeff[tuple(idx_a)] = f[i][tuple(idx_a)] - f[i][tuple(idx_b)]
                rows.append(coeff.reshape(m))
    return np.asarray(rows), f


def solve_ce_esr(
    game: MONFG,
    utilities: Sequence[UtilitySpec],
    objective: str = "feasible",
    player: int | None = None,
) -> CorrelatedStrategy:
    """Compute a correlated equilibrium of the trade-off game by LP.

    ``objective`` selects the linear objective over scalarised payoffs:
    ``"feasible"`` (any CE), ``"max_sum"`` (total scalarised payoff) or
    ``"max_player"`` (one player's scalarised payoff, via ``player``). The
    result is re-verified before being returned; a finite game always has a
    CE, so infeasibility is an internal error.
    """
    utilities = _check_utilities(game, utilities)
    a_ineq, f = ce_esr_constraints(game, utilities)
    m = game.num_joint_actions
    if objective == "feasible":
        c = np.zeros(m)
    elif objective == "max_sum":
        c = f.sum(axis=0).reshape(m)
    elif objective == "max_player":
        if player is None or not 0 <= player < game.num_players:
            raise ValueError("objective 'max_player' needs a valid player index")
        c = f[player].reshape(m)
    else:
        raise ValueError(f"unknown objective {objective!r}")
    lp = LinearProgram(
        objective=c,
        a_ineq=a_ineq,
        b_ineq=np.zeros(a_ineq.shape[0]),
        a_eq=np.ones((1, m)),
        b_eq=np.ones(1),
    )
    try:
        x, _ = solve_lp(lp)
    except Exception as exc:  # existence is guaranteed for finite games
        raise SolverError(f"correlated-equilibrium LP failed: {exc}") from exc
    x = np.clip(x, 0.0, None)
    x /= x.sum()
    sigma = CorrelatedStrategy(x.reshape(game.action_counts))
    report = verify_ce_esr(game, utilities, sigma, tol=1e-7)
    if not report.verdict:
        raise SolverError(
            f"LP solution failed re-verification (max gain {report.max_gain:.3e})"
        )
    return sigma


# ---------------------------------------------------------------------------
# Grid scans
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridScanResult:
    resolution: int
    min_max_gain: float
    argmin_profile: StrategyProfile
    approx_equilibria: tuple[StrategyProfile, ...]
    tolerance: float


def grid_size(action_counts: Sequence[int], resolution: int) -> int:
    total = 1
    for k in action_counts:
        total *= math.comb(resolution + k - 1, k - 1)
    return total


def scan_ne_ser_grid(
    game: MONFG,
    utilities: Sequence[UtilitySpec],
    resolution: int,
    tol: float = DEFAULT_TOL,
    opt: OptConfig | None = None,
    max_profiles: int = DEFAULT_PROFILE_CAP,
) -> GridScanResult:
    """Exhaustive SER best-response gains over the joint simplex lattice.

    Every grid profile is scored by its worst per-player best-response gain
    (clamped at zero). Profiles at or below ``tol`` are returned as
    approximate equilibria; the minimizing profile breaks ties by
    lexicographic order.
    """
    utilities = _check_utilities(game, utilities)
    if resolution < 1:
        raise GridTooLarge("resolution must be a positive integer")
    total = grid_size(game.action_counts, resolution)
    if total > max_profiles:
        raise GridTooLarge(
            f"grid has {total} joint profiles, above the cap {max_profiles}"
        )
    if game.num_players == 2:
        return _scan_two_player(game, utilities, resolution, tol, opt)
    return _scan_general(game, utilities, resolution, tol, opt)


def _scan_two_player(game, utilities, resolution, tol, opt) -> GridScanResult:
    grids = [simplex_grid(k, resolution) for k in game.action_counts]
    m1, m2 = grids[0].shape[0], grids[1].shape[0]
    gains = np.empty((2, m1, m2))
    for s2 in range(m2):
        opp = MixedStrategy(grids[1][s2])
        _, best = best_response_ser(game, utilities[0], 0, [opp], opt)
        V = conditional_payoff_matrix(game, 0, [opp])
        base = utility_values(utilities[0], grids[0] @ V)
        gains[0, :, s2] = np.maximum(best - base, 0.0)
    for s1 in range(m1):
        opp = MixedStrategy(grids[0][s1])
        _, best = best_response_ser(game, utilities[1], 1, [opp], opt)
        V = conditional_payoff_matrix(game, 1, [opp])
        base = utility_values(utilities[1], grids[1] @ V)
        gains[1, s1, :] = np.maximum(best - base, 0.0)
    worst = gains.max(axis=0)
    flat = int(np.argmin(worst.reshape(-1)))
    a1, a2 = divmod(flat, m2)

    def profile(i1: int, i2: int) -> StrategyProfile:
        return StrategyProfile.from_probs([grids[0][i1], grids[1][i2]])

    approx = tuple(
        profile(i1, i2)
        for i1, i2 in np.argwhere(worst <= tol)
    )
    return GridScanResult(
        resolution=resolution,
        min_max_gain=float(worst[a1, a2]),
        argmin_profile=profile(a1, a2),
        approx_equilibria=approx,
        tolerance=tol,
    )


def _scan_general(game, utilities, resolution, tol, opt) -> GridScanResult:
    n = game.num_players
    grids = [simplex_grid(k, resolution) for k in game.action_counts]
    best_cache: dict[tuple, float] = {}
    min_gain = math.inf
    argmin = None
    approx = []
    for combo in itertools.product(*(range(g.shape[0]) for g in grids)):
        strategies = [MixedStrategy(grids[j][combo[j]]) for j in range(n)]
        prof = StrategyProfile(tuple(strategies))
        worst = 0.0
        for i in range(n):
            key = (i,) + tuple(c for j, c in enumerate(combo) if j != i)
            if key not in best_cache:
                opponents = [strategies[j] for j in range(n) if j != i]
                best_cache[key] = best_response_ser(
                    game, utilities[i], i, opponents, opt
                )[1]
            base = utility_eval(
                utilities[i], expected_payoff_profile(game, prof, i)
            )
            worst = max(worst, max(best_cache[key] - base, 0.0))
        if worst < min_gain:
            min_gain = worst
            argmin = prof
        if worst <= tol:
            approx.append(prof)
    return GridScanResult(
        resolution=resolution,
        min_max_gain=float(min_gain),
        argmin_profile=argmin,
        approx_equilibria=tuple(approx),
        tolerance=tol,
    )
