"""Built-in games, utility pairs, and candidate strategies, addressable by name.

Every entry carries a provenance string quoting the caption of the source
table it was transcribed from, so test failures can be traced back to the
original values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import (
    MONFG,
    CorrelatedStrategy,
    LinearUtility,
    PolySumUtility,
    ProductUtility,
    StrategyProfile,
    UtilitySpec,
)
from .errors import UnknownName

Payload = Union[
    MONFG, CorrelatedStrategy, StrategyProfile, tuple[UtilitySpec, ...]
]


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    kind: str  # game | utility_pair | profile | correlated_strategy
    payload: Payload
    provenance: str


def _identical(table: list[list[list[float]]]) -> np.ndarray:
    """Payoff tensor for a 2-player game where both players share each vector."""
    base = np.asarray(table, dtype=np.float64)
    return np.stack([base, base], axis=2)


def _bimatrix(p1: list[list[float]], p2: list[list[float]]) -> np.ndarray:
    """Payoff tensor for a 2-player single-objective game from two matrices."""
    a = np.asarray(p1, dtype=np.float64)[..., None]
    b = np.asarray(p2, dtype=np.float64)[..., None]
    return np.stack([a, b], axis=2)


U1_POLYSUM = PolySumUtility(weights=(1.0, 1.0), exponents=(2, 2))
U2_PRODUCT = ProductUtility()
IDENTITY_1D = LinearUtility(weights=(1.0,))

_CHICKEN = MONFG(
    _bimatrix([[6, 2], [7, 0]], [[6, 7], [2, 0]]),
    action_labels=(("S", "D"), ("S", "D")),
)

_IMBALANCING = MONFG(
    _identical(
        [
            [[4, 0], [3, 1], [2, 2]],
            [[3, 1], [2, 2], [1, 3]],
            [[2, 2], [1, 3], [0, 4]],
        ]
    ),
    action_labels=(("L", "M", "R"), ("L", "M", "R")),
)

_IMBALANCING_TRADEOFF = MONFG(
    _bimatrix(
        [[16, 10, 8], [10, 8, 10], [8, 10, 16]],
        [[0, 3, 4], [3, 4, 3], [4, 3, 0]],
    ),
    action_labels=(("L", "M", "R"), ("L", "M", "R")),
)

_GAME2 = MONFG(
    _identical([[[4, 0], [2, 2]], [[2, 2], [0, 4]]]),
    action_labels=(("L", "R"), ("L", "R")),
)

_GAME3 = MONFG(
    _identical(
        [
            [[4, 1], [1, 2], [2, 1]],
            [[3, 1], [3, 2], [1, 2]],
            [[1, 2], [2, 1], [1, 3]],
        ]
    ),
    action_labels=(("L", "M", "R"), ("L", "M", "R")),
)

_ENTRIES: dict[str, CatalogEntry] = {}


def _add(name: str, kind: str, payload: Payload, provenance: str) -> None:
    _ENTRIES[name] = CatalogEntry(name, kind, payload, provenance)


_add(
    "chicken",
    "game",
    _CHICKEN,
    'Table: "Payoff matrix for the game of Chicken."',
)
_add(
    "chicken_ce",
    "correlated_strategy",
    CorrelatedStrategy(np.array([[0.5, 0.25], [0.25, 0.0]])),
    'Table: "A possible correlated equilibrium for the game of Chicken."',
)
_add(
    "imbalancing",
    "game",
    _IMBALANCING,
    'Table: "The (Im)balancing act game."',
)
_add(
    "imbalancing_tradeoff",
    "game",
    _IMBALANCING_TRADEOFF,
    'Table: "The (Im)balancing act game under ESR with utility functions '
    "u1(p) = p1 * p1 + p2 * p2 and u2(p) = p1 * p2 applied.\"",
)
_add(
    "imbalancing_ce",
    "correlated_strategy",
    CorrelatedStrategy(np.array([[0.0, 0.75, 0.0], [0.0, 0.0, 0.0], [0.0, 0.25, 0.0]])),
    'Table: "A correlated equilibrium in the (Im)balancing act game under SER."',
)
_add(
    "game2",
    "game",
    _GAME2,
    'Table: "The (Im)balancing act game without action M (left), together with '
    "the corresponding correlated strategy (right).\" (left)",
)
_add(
    "game2_ce",
    "correlated_strategy",
    CorrelatedStrategy(np.full((2, 2), 0.25)),
    'Table: "The (Im)balancing act game without action M (left), together with '
    "the corresponding correlated strategy (right).\" (right)",
)
_add(
    "game3",
    "game",
    _GAME3,
    'Table: "A 3-action MONFG which has 3 pure strategy NE (left) -- (L,L), '
    "(M,M) and (R,R)\" (left)",
)
_add(
    "game3_ce",
    "correlated_strategy",
    CorrelatedStrategy(np.array([[0.5, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.0]])),
    'Table: "A 3-action MONFG which has 3 pure strategy NE (left) -- (L,L), '
    "(M,M) and (R,R)\" (right)",
)
_add(
    "paper",
    "utility_pair",
    (U1_POLYSUM, U2_PRODUCT),
    "Utility functions u1(p) = p1 * p1 + p2 * p2 and u2(p) = p1 * p2 used "
    "throughout the worked examples.",
)
_add(
    "identity",
    "utility_pair",
    (IDENTITY_1D, IDENTITY_1D),
    "Identity scalarisation for single-objective games.",
)
_add(
    "imbalancing_mixed_profile",
    "profile",
    StrategyProfile.from_probs([[0.5, 0.0, 0.5], [0.0, 1.0, 0.0]]),
    "Worked example: agent 1 mixes L and R equally, agent 2 plays M.",
)

CANONICAL_NAMES = (
    "chicken",
    "chicken_ce",
    "imbalancing",
    "imbalancing_tradeoff",
    "imbalancing_ce",
    "game2",
    "game2_ce",
    "game3",
    "game3_ce",
)


def get(name: str) -> CatalogEntry:
    """Catalog entry by name; raises UnknownName otherwise."""
    try:
        return _ENTRIES[name]
    except KeyError:
        raise UnknownName(f"no catalog entry named {name!r}") from None


def list_entries() -> tuple[CatalogEntry, ...]:
    """All entries in insertion order."""
    return tuple(_ENTRIES.values())
