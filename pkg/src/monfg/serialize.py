"""JSON encodings for games, utilities, strategies, reports, and scan results.

Schemas:

* game: ``{"players": n, "objectives": d, "actions": [[labels...], ...],
  "payoffs": nested arrays indexed [a_1][a_2]...[player][objective]}``
* utility: ``{"variant": "linear"|"polysum"|"product"|"threshold",
  ...variant fields..., "nonneg_guard": bool}``; a utility file holds a JSON
  list with one utility object per player.
* strategy profile: per-player probability lists; correlated strategy: nested
  probability array over the joint-action space.

All floats round-trip exactly through ``json`` (repr-based encoding).
"""

from __future__ import annotations

from typing import Any, Sequence

import numpy as np

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
)
from .equilibrium import (
    EquilibriumReport,
    GridScanResult,
    MixedDeviation,
    PureDeviation,
    RecommendationSwap,
)
from .errors import ShapeMismatch


# ---------------------------------------------------------------------------
# Games
# ---------------------------------------------------------------------------


def game_to_dict(game: MONFG) -> dict[str, Any]:
    return {
        "players": game.num_players,
        "objectives": game.num_objectives,
        "actions": [list(group) for group in game.action_labels],
        "payoffs": game.payoffs.tolist(),
    }


def game_from_dict(data: dict[str, Any]) -> MONFG:
    for key in ("players", "objectives", "actions", "payoffs"):
        if key not in data:
            raise ShapeMismatch(f"game JSON is missing the {key!r} field")
    payoffs = np.asarray(data["payoffs"], dtype=np.float64)
    game = MONFG(payoffs, action_labels=tuple(tuple(g) for g in data["actions"]))
    if game.num_players != int(data["players"]):
        raise ShapeMismatch(
            f"game JSON 'players' is {data['players']} but payoffs imply {game.num_players}"
        )
    if game.num_objectives != int(data["objectives"]):
        raise ShapeMismatch(
            f"game JSON 'objectives' is {data['objectives']} but payoffs imply {game.num_objectives}"
        )
    return game


# ---------------------------------------------------------------------------
# Utilities
# ---------------------------------------------------------------------------


def utility_to_dict(u: UtilitySpec) -> dict[str, Any]:
    out: dict[str, Any] = {"variant": u.variant, "nonneg_guard": u.nonneg_guard}
    if isinstance(u, LinearUtility):
        out["weights"] = list(u.weights)
    elif isinstance(u, PolySumUtility):
        out["weights"] = list(u.weights)
        out["exponents"] = list(u.exponents)
    elif isinstance(u, ThresholdUtility):
        out["objective"] = u.objective
        out["threshold"] = u.threshold
        out["reward"] = u.reward
    return out


def utility_from_dict(data: dict[str, Any]) -> UtilitySpec:
    variant = data.get("variant")
    if variant == "linear":
        return LinearUtility(
            weights=tuple(data["weights"]),
            nonneg_guard=bool(data.get("nonneg_guard", False)),
        )
    if variant == "polysum":
        return PolySumUtility(
            weights=tuple(data["weights"]),
            exponents=tuple(data["exponents"]),
            nonneg_guard=bool(data.get("nonneg_guard", True)),
        )
    if variant == "product":
        return ProductUtility(nonneg_guard=bool(data.get("nonneg_guard", True)))
    if variant == "threshold":
        return ThresholdUtility(
            objective=int(data["objective"]),
            threshold=float(data["threshold"]),
            reward=float(data["reward"]),
            nonneg_guard=bool(data.get("nonneg_guard", False)),
        )
    raise ShapeMismatch(f"unknown utility variant {variant!r}")


def utilities_to_list(utilities: Sequence[UtilitySpec]) -> list[dict[str, Any]]:
    return [utility_to_dict(u) for u in utilities]


def utilities_from_list(data: Sequence[dict[str, Any]]) -> tuple[UtilitySpec, ...]:
    return tuple(utility_from_dict(d) for d in data)


# ---------------------------------------------------------------------------
# Strategies
# ---------------------------------------------------------------------------


def profile_to_list(profile: StrategyProfile) -> list[list[float]]:
    return [s.probs.tolist() for s in profile]


def profile_from_list(data: Sequence[Sequence[float]]) -> StrategyProfile:
    return StrategyProfile.from_probs([list(p) for p in data])


def correlated_to_list(sigma: CorrelatedStrategy) -> list:
    return sigma.probs.tolist()


def correlated_from_list(data: Sequence) -> CorrelatedStrategy:
    return CorrelatedStrategy(np.asarray(data, dtype=np.float64))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def _witness_to_dict(witness: Any) -> dict[str, Any]:
    if isinstance(witness, PureDeviation):
        return {"type": "pure_action", "player": witness.player, "action": witness.action}
    if isinstance(witness, MixedDeviation):
        return {
            "type": "mixed_strategy",
            "player": witness.player,
            "probs": witness.strategy.probs.tolist(),
        }
    if isinstance(witness, RecommendationSwap):
        return {
            "type": "recommendation_swap",
            "player": witness.player,
            "recommended": witness.recommended,
            "response": witness.response,
        }
    if isinstance(witness, StrategyModification):
        return {
            "type": "modification",
            "player": witness.player,
            "mapping": list(witness.mapping),
        }
    raise TypeError(f"unknown witness {witness!r}")


def report_to_dict(report: EquilibriumReport) -> dict[str, Any]:
    return {
        "verdict": report.verdict,
        "tolerance": report.tolerance,
        "players": [
            {
                "max_gain": p.max_gain,
                "witness": _witness_to_dict(p.witness),
                "value": p.value_at_candidate,
            }
            for p in report.players
        ],
    }


def scan_to_dict(result: GridScanResult) -> dict[str, Any]:
    return {
        "resolution": result.resolution,
        "tolerance": result.tolerance,
        "min_max_gain": result.min_max_gain,
        "argmin_profile": profile_to_list(result.argmin_profile),
        "approx_equilibria": [profile_to_list(p) for p in result.approx_equilibria],
    }
