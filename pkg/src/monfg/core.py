"""Game, strategy, and utility primitives for multi-objective normal-form games.

A multi-objective normal-form game (MONFG) maps every joint action to one
payoff vector per player, with one real entry per objective. Players rank
outcomes through scalarisation (utility) functions, applied either before the
expectation over outcomes (expected scalarised returns, ESR) or after it
(scalarised expected returns, SER). Everything in this module is immutable
after construction and safe to share across workers; the value operations are
pure functions.

Expectations accumulate in row-major order over the joint-action table so that
repeated runs are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    NonDifferentiable,
    ShapeMismatch,
    ZeroMarginal,
)

PROB_TOL = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# Games
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MONFG:
    """An n-player, d-objective normal-form game with a complete payoff table.

    ``payoffs`` has shape ``action_counts + (num_players, num_objectives)``;
    entry ``payoffs[a1, ..., an, i]`` is player ``i``'s payoff vector for the
    joint action ``(a1, ..., an)``. ``num_objectives == 1`` is allowed so that
    scalarised games reuse the same type.
    """

    payoffs: np.ndarray
    action_labels: tuple[tuple[str, ...], ...] = field(default=())

    def __post_init__(self) -> None:
        arr = np.asarray(self.payoffs, dtype=np.float64)
        if arr.ndim < 3:
            raise ShapeMismatch(
                f"payoffs must have shape action_counts + (players, objectives); got {arr.shape}"
            )
        n = arr.ndim - 2
        if arr.shape[-2] != n:
            raise ShapeMismatch(
                f"payoffs: {n} action axes but {arr.shape[-2]} player slots"
            )
        if n < 2:
            raise ShapeMismatch("a game needs at least 2 players")
        if arr.shape[-1] < 1:
            raise ShapeMismatch("a game needs at least 1 objective")
        if min(arr.shape[:n]) < 1:
            raise ShapeMismatch("every player needs at least one action")
        if not np.all(np.isfinite(arr)):
            raise ShapeMismatch("payoffs must be finite")
        labels = self.action_labels
        if not labels:
            labels = tuple(
                tuple(f"a{j}" for j in range(k)) for k in arr.shape[:n]
            )
        else:
            labels = tuple(tuple(str(l) for l in group) for group in labels)
            if len(labels) != n or any(
                len(group) != k for group, k in zip(labels, arr.shape[:n])
            ):
                raise ShapeMismatch("action_labels do not match action counts")
        object.__setattr__(self, "payoffs", _readonly(arr))
        object.__setattr__(self, "action_labels", labels)

    @property
    def num_players(self) -> int:
        return self.payoffs.ndim - 2

    @property
    def num_objectives(self) -> int:
        return self.payoffs.shape[-1]

    @property
    def action_counts(self) -> tuple[int, ...]:
        return self.payoffs.shape[: self.num_players]

    @property
    def num_joint_actions(self) -> int:
        return int(np.prod(self.action_counts))

    def joint_actions(self) -> Iterator[tuple[int, ...]]:
        """All joint action profiles in row-major order."""
        return iter(np.ndindex(*self.action_counts))

    def payoff(self, profile: Sequence[int], player: int) -> np.ndarray:
        """Payoff vector of ``player`` at a pure joint action."""
        return self.payoffs[tuple(profile) + (player,)]

    def joint_label(self, profile: Sequence[int]) -> str:
        """Human-readable joint-action label, e.g. ``"L|M"``."""
        return "|".join(self.action_labels[j][a] for j, a in enumerate(profile))


# ---------------------------------------------------------------------------
# Strategies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MixedStrategy:
    """A probability distribution over one player's actions."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise ShapeMismatch("probs must be a non-empty 1-D vector")
        if not np.all(np.isfinite(p)):
            raise ShapeMismatch("probs must be finite")
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise ShapeMismatch("probs entries must lie in [0, 1]")
        if abs(float(p.sum()) - 1.0) > PROB_TOL:
            raise ShapeMismatch(
                f"probs sum to {float(p.sum()):.12g}, outside tolerance {PROB_TOL}"
            )
        object.__setattr__(self, "probs", _readonly(p))

    @classmethod
    def pure(cls, num_actions: int, action: int) -> "MixedStrategy":
        p = np.zeros(num_actions)
        p[action] = 1.0
        return cls(p)

    @property
    def num_actions(self) -> int:
        return self.probs.shape[0]


@dataclass(frozen=True)
class StrategyProfile:
    """One independent mixed strategy per player."""

    strategies: tuple[MixedStrategy, ...]

    def __post_init__(self) -> None:
        strategies = tuple(
            s if isinstance(s, MixedStrategy) else MixedStrategy(np.asarray(s))
            for s in self.strategies
        )
        if len(strategies) < 2:
            raise ShapeMismatch("a profile needs at least 2 strategies")
        object.__setattr__(self, "strategies", strategies)

    @classmethod
    def from_probs(cls, probs: Sequence[Sequence[float]]) -> "StrategyProfile":
        return cls(tuple(MixedStrategy(np.asarray(p)) for p in probs))

    @classmethod
    def pure(cls, action_counts: Sequence[int], actions: Sequence[int]) -> "StrategyProfile":
        return cls(
            tuple(MixedStrategy.pure(k, a) for k, a in zip(action_counts, actions))
        )

    def __len__(self) -> int:
        return len(self.strategies)

    def __iter__(self) -> Iterator[MixedStrategy]:
        return iter(self.strategies)

    def __getitem__(self, i: int) -> MixedStrategy:
        return self.strategies[i]

    def replace(self, player: int, strategy: MixedStrategy) -> "StrategyProfile":
        new = list(self.strategies)
        new[player] = strategy
        return StrategyProfile(tuple(new))


@dataclass(frozen=True)
class CorrelatedStrategy:
    """A joint distribution over the full joint-action space."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim < 2:
            raise ShapeMismatch("a correlated strategy needs one axis per player")
        if not np.all(np.isfinite(p)):
            raise ShapeMismatch("probs must be finite")
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise ShapeMismatch("probs entries must lie in [0, 1]")
        if abs(float(p.sum()) - 1.0) > PROB_TOL:
            raise ShapeMismatch(
                f"probs sum to {float(p.sum()):.12g}, outside tolerance {PROB_TOL}"
            )
        object.__setattr__(self, "probs", _readonly(p))

    @classmethod
    def from_profile(cls, profile: StrategyProfile) -> "CorrelatedStrategy":
        """Product distribution induced by independent mixed strategies."""
        joint = profile[0].probs
        for s in profile.strategies[1:]:
            joint = np.multiply.outer(joint, s.probs)
        return cls(joint)

    @property
    def action_counts(self) -> tuple[int, ...]:
        return self.probs.shape

    def marginal(self, player: int) -> np.ndarray:
        """Marginal recommendation distribution of one player."""
        axes = tuple(j for j in range(self.probs.ndim) if j != player)
        return self.probs.sum(axis=axes)


@dataclass(frozen=True)
class StrategyModification:
    """A total remapping of one player's recommended actions.

    ``mapping[a]`` is the action played when ``a`` is recommended.
    """

    player: int
    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        mapping = tuple(int(a) for a in self.mapping)
        k = len(mapping)
        if k == 0:
            raise ShapeMismatch("mapping must cover at least one action")
        if any(a < 0 or a >= k for a in mapping):
            raise ShapeMismatch("mapping targets must be valid action indices")
        object.__setattr__(self, "mapping", mapping)

    @classmethod
    def identity(cls, player: int, num_actions: int) -> "StrategyModification":
        return cls(player, tuple(range(num_actions)))

    @classmethod
    def swap(
        cls, player: int, num_actions: int, recommended: int, response: int
    ) -> "StrategyModification":
        m = list(range(num_actions))
        m[recommended] = response
        return cls(player, tuple(m))

    def apply(self, action: int) -> int:
        return self.mapping[action]


# ---------------------------------------------------------------------------
# Utility (scalarisation) functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearUtility:
    """Weighted sum of objectives; weights are non-negative and sum to 1."""

    weights: tuple[float, ...]
    nonneg_guard: bool = False
    variant = "linear"

    def __post_init__(self) -> None:
        w = tuple(float(x) for x in self.weights)
        if len(w) == 0:
            raise DimensionMismatch("linear utility needs at least one weight")
        if any(x < 0.0 for x in w):
            raise DimensionMismatch("linear weights must be non-negative")
        if abs(sum(w) - 1.0) > PROB_TOL:
            raise DimensionMismatch(
                f"linear weights sum to {sum(w):.12g}, outside tolerance {PROB_TOL}"
            )
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class PolySumUtility:
    """Weighted sum of per-objective integer powers, w_j * p_j ** e_j."""

    weights: tuple[float, ...]
    exponents: tuple[int, ...]
    nonneg_guard: bool = True
    variant = "polysum"

    def __post_init__(self) -> None:
        w = tuple(float(x) for x in self.weights)
        e = tuple(int(x) for x in self.exponents)
        if len(w) == 0 or len(w) != len(e):
            raise DimensionMismatch("weights and exponents must have equal, positive length")
        if any(x < 1 for x in e):
            raise DimensionMismatch("exponents must be positive integers")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "exponents", e)


@dataclass(frozen=True)
class ProductUtility:
    """Product of all objective values."""

    nonneg_guard: bool = True
    variant = "product"


@dataclass(frozen=True)
class ThresholdUtility:
    """Fixed reward when one objective reaches a threshold, 0 otherwise."""

    objective: int
    threshold: float
    reward: float
    nonneg_guard: bool = False
    variant = "threshold"

    def __post_init__(self) -> None:
        if self.objective < 0:
            raise DimensionMismatch("threshold objective index must be non-negative")


UtilitySpec = Union[LinearUtility, PolySumUtility, ProductUtility, ThresholdUtility]


def _check_dim(u: UtilitySpec, d: int) -> None:
    if isinstance(u, LinearUtility) and len(u.weights) != d:
        raise DimensionMismatch(
            f"linear utility expects {len(u.weights)} objectives, payoff has {d}"
        )
    if isinstance(u, PolySumUtility) and len(u.weights) != d:
        raise DimensionMismatch(
            f"polysum utility expects {len(u.weights)} objectives, payoff has {d}"
        )
    if isinstance(u, ThresholdUtility) and u.objective >= d:
        raise DimensionMismatch(
            f"threshold objective index {u.objective} out of range for {d} objectives"
        )


def utility_eval(u: UtilitySpec, p: Sequence[float]) -> float:
    """Scalar utility of one payoff vector.

    When ``nonneg_guard`` is set the utility is 0 as soon as any payoff
    component is negative.
    """
    vec = np.asarray(p, dtype=np.float64)
    if vec.ndim != 1:
        raise DimensionMismatch("payoff must be a 1-D vector")
    _check_dim(u, vec.shape[0])
    if u.nonneg_guard and bool(np.any(vec < 0.0)):
        return 0.0
    if isinstance(u, LinearUtility):
        total = 0.0
        for w, x in zip(u.weights, vec):
            total += w * float(x)
        return total
    if isinstance(u, PolySumUtility):
        total = 0.0
        for w, e, x in zip(u.weights, u.exponents, vec):
            total += w * float(x) ** e
        return total
    if isinstance(u, ProductUtility):
        total = 1.0
        for x in vec:
            total *= float(x)
        return total
    if isinstance(u, ThresholdUtility):
        return u.reward if float(vec[u.objective]) >= u.threshold else 0.0
    raise TypeError(f"unknown utility spec {u!r}")


def utility_values(u: UtilitySpec, points: np.ndarray) -> np.ndarray:
    """Vectorised ``utility_eval`` over the rows of ``points``.

    Exists for hot paths (grid scans); agrees with ``utility_eval`` row by row.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise DimensionMismatch("points must be a 2-D array of payoff rows")
    d = pts.shape[1]
    _check_dim(u, d)
    # Accumulate objective by objective in the same order as utility_eval so
    # the two paths agree bit for bit.
    if isinstance(u, LinearUtility):
        vals = np.zeros(pts.shape[0])
        for j, w in enumerate(u.weights):
            vals += w * pts[:, j]
    elif isinstance(u, PolySumUtility):
        vals = np.zeros(pts.shape[0])
        for j, (w, e) in enumerate(zip(u.weights, u.exponents)):
            vals += w * pts[:, j] ** e
    elif isinstance(u, ProductUtility):
        vals = np.ones(pts.shape[0])
        for j in range(d):
            vals *= pts[:, j]
    elif isinstance(u, ThresholdUtility):
        vals = np.where(pts[:, u.objective] >= u.threshold, u.reward, 0.0)
    else:
        raise TypeError(f"unknown utility spec {u!r}")
    if u.nonneg_guard:
        vals = np.where(np.any(pts < 0.0, axis=1), 0.0, vals)
    return vals


def utility_grad(u: UtilitySpec, p: Sequence[float]) -> np.ndarray:
    """Analytic gradient of the utility at ``p``.

    Returns the zero vector on the region clipped by ``nonneg_guard``. The
    threshold variant is rejected: it is flat almost everywhere and has no
    derivative at the jump.
    """
    if isinstance(u, ThresholdUtility):
        raise NonDifferentiable("threshold utilities have no gradient")
    vec = np.asarray(p, dtype=np.float64)
    if vec.ndim != 1:
        raise DimensionMismatch("payoff must be a 1-D vector")
    d = vec.shape[0]
    _check_dim(u, d)
    if u.nonneg_guard and bool(np.any(vec < 0.0)):
        return np.zeros(d)
    if isinstance(u, LinearUtility):
        return np.asarray(u.weights, dtype=np.float64)
    if isinstance(u, PolySumUtility):
        g = np.empty(d)
        for j, (w, e) in enumerate(zip(u.weights, u.exponents)):
            g[j] = w * e * float(vec[j]) ** (e - 1)
        return g
    if isinstance(u, ProductUtility):
        g = np.empty(d)
        for j in range(d):
            prod = 1.0
            for l in range(d):
                if l != j:
                    prod *= float(vec[l])
            g[j] = prod
        return g
    raise TypeError(f"unknown utility spec {u!r}")


# ---------------------------------------------------------------------------
# Expected payoffs and scalarised values
# ---------------------------------------------------------------------------


def _check_profile(game: MONFG, profile: StrategyProfile) -> None:
    if len(profile) != game.num_players:
        raise ShapeMismatch(
            f"profile has {len(profile)} strategies for {game.num_players} players"
        )
    for j, s in enumerate(profile):
        if s.num_actions != game.action_counts[j]:
            raise ShapeMismatch(
                f"player {j} strategy has {s.num_actions} entries, game has "
                f"{game.action_counts[j]} actions"
            )


def _check_correlated(game: MONFG, sigma: CorrelatedStrategy) -> None:
    if sigma.action_counts != game.action_counts:
        raise ShapeMismatch(
            f"correlated strategy shape {sigma.action_counts} does not match "
            f"action counts {game.action_counts}"
        )


def _check_player(game: MONFG, player: int) -> None:
    if not 0 <= player < game.num_players:
        raise ShapeMismatch(f"player index {player} out of range")


def joint_probabilities(profile: StrategyProfile) -> np.ndarray:
    """Product joint distribution of independent per-player strategies."""
    joint = profile[0].probs
    for s in profile.strategies[1:]:
        joint = np.multiply.outer(joint, s.probs)
    return joint


def expected_payoff_profile(
    game: MONFG, profile: StrategyProfile, player: int
) -> np.ndarray:
    """Expected payoff vector of ``player`` under independent mixing."""
    _check_profile(game, profile)
    _check_player(game, player)
    joint = joint_probabilities(profile)
    out = np.zeros(game.num_objectives)
    for cell in np.ndindex(*game.action_counts):
        w = joint[cell]
        if w != 0.0:
            out += w * game.payoffs[cell + (player,)]
    return out


def expected_payoff_correlated(
    game: MONFG, sigma: CorrelatedStrategy, player: int
) -> np.ndarray:
    """Expected payoff vector of ``player`` under a joint distribution."""
    _check_correlated(game, sigma)
    _check_player(game, player)
    out = np.zeros(game.num_objectives)
    for cell in np.ndindex(*game.action_counts):
        w = sigma.probs[cell]
        if w != 0.0:
            out += w * game.payoffs[cell + (player,)]
    return out


def expected_payoff_modified(
    game: MONFG, sigma: CorrelatedStrategy, modification: StrategyModification
) -> np.ndarray:
    """Expected payoff of the modifying player when recommendations are remapped."""
    _check_correlated(game, sigma)
    i = modification.player
    _check_player(game, i)
    if len(modification.mapping) != game.action_counts[i]:
        raise ShapeMismatch(
            f"modification covers {len(modification.mapping)} actions, player {i} "
            f"has {game.action_counts[i]}"
        )
    out = np.zeros(game.num_objectives)
    for cell in np.ndindex(*game.action_counts):
        w = sigma.probs[cell]
        if w != 0.0:
            played = list(cell)
            played[i] = modification.mapping[cell[i]]
            out += w * game.payoffs[tuple(played) + (i,)]
    return out


def conditional_expected_payoff(
    game: MONFG,
    sigma: CorrelatedStrategy,
    player: int,
    recommended: int,
    response: int,
) -> np.ndarray:
    """Expected payoff of playing ``response`` given recommendation ``recommended``.

    The expectation is over the other players' actions conditioned on the
    recommendation, i.e. the slice of ``sigma`` where ``player`` is told
    ``recommended``, renormalised by the recommendation's marginal probability.
    """
    _check_correlated(game, sigma)
    _check_player(game, player)
    k = game.action_counts[player]
    if not (0 <= recommended < k and 0 <= response < k):
        raise ShapeMismatch("recommended/response action index out of range")
    num = np.zeros(game.num_objectives)
    den = 0.0
    counts = list(game.action_counts)
    counts[player] = 1
    for cell in np.ndindex(*counts):
        rec_cell = list(cell)
        rec_cell[player] = recommended
        w = sigma.probs[tuple(rec_cell)]
        if w != 0.0:
            play_cell = list(rec_cell)
            play_cell[player] = response
            num += w * game.payoffs[tuple(play_cell) + (player,)]
            den += w
    if den == 0.0:
        raise ZeroMarginal(
            f"recommendation {recommended} for player {player} has zero probability"
        )
    return num / den


def esr_value(
    game: MONFG, profile: StrategyProfile, player: int, u: UtilitySpec
) -> float:
    """Expected scalarised return: expectation of the utility of realised payoffs."""
    _check_profile(game, profile)
    _check_player(game, player)
    joint = joint_probabilities(profile)
    total = 0.0
    for cell in np.ndindex(*game.action_counts):
        w = joint[cell]
        if w != 0.0:
            total += w * utility_eval(u, game.payoffs[cell + (player,)])
    return total


def esr_value_correlated(
    game: MONFG, sigma: CorrelatedStrategy, player: int, u: UtilitySpec
) -> float:
    """Expected scalarised return under a joint distribution."""
    _check_correlated(game, sigma)
    _check_player(game, player)
    total = 0.0
    for cell in np.ndindex(*game.action_counts):
        w = sigma.probs[cell]
        if w != 0.0:
            total += w * utility_eval(u, game.payoffs[cell + (player,)])
    return total


def ser_value(
    game: MONFG, profile: StrategyProfile, player: int, u: UtilitySpec
) -> float:
    """Scalarised expected return: utility of the expected payoff vector."""
    return utility_eval(u, expected_payoff_profile(game, profile, player))


def conditional_payoff_matrix(
    game: MONFG, player: int, opponents: Sequence[MixedStrategy]
) -> np.ndarray:
    """Per-own-action expected payoff vectors against fixed opponent mixing.

    Row ``a`` is the expected payoff vector of playing ``a`` while every other
    player ``j`` mixes with ``opponents`` (given in increasing player order,
    skipping ``player``). The mixture value set of the returned ``(k, d)``
    matrix is the convex hull of its rows.
    """
    _check_player(game, player)
    n = game.num_players
    if len(opponents) != n - 1:
        raise ShapeMismatch(
            f"expected {n - 1} opponent strategies, got {len(opponents)}"
        )
    others = [j for j in range(n) if j != player]
    for j, s in zip(others, opponents):
        if s.num_actions != game.action_counts[j]:
            raise ShapeMismatch(
                f"opponent strategy for player {j} has {s.num_actions} entries, "
                f"game has {game.action_counts[j]} actions"
            )
    arr = game.payoffs[..., player, :]
    arr = np.moveaxis(arr, player, 0)
    # Opponent axes now sit at positions 1..n-1 in ascending player order;
    # contracting position 1 repeatedly consumes them in that order.
    for s in opponents:
        arr = np.tensordot(arr, s.probs, axes=([1], [0]))
    return np.ascontiguousarray(arr)
