import json

import numpy as np
import pytest

from monfg import catalog, serialize
from monfg.errors import UnknownName

CANONICAL = [
    "chicken",
    "chicken_ce",
    "imbalancing",
    "imbalancing_tradeoff",
    "imbalancing_ce",
    "game2",
    "game2_ce",
    "game3",
    "game3_ce",
]


def test_canonical_names_present():
    names = {e.name for e in catalog.list_entries()}
    for name in CANONICAL:
        assert name in names


def test_every_listed_name_round_trips():
    for entry in catalog.list_entries():
        assert catalog.get(entry.name) is entry
        assert entry.provenance


def test_unknown_name():
    with pytest.raises(UnknownName):
        catalog.get("definitely-not-a-game")


def test_imbalancing_payoff_vectors_identical_for_both_agents():
    g = catalog.get("imbalancing").payload
    np.testing.assert_array_equal(g.payoffs[..., 0, :], g.payoffs[..., 1, :])
    np.testing.assert_array_equal(g.payoff((0, 0), 0), [4.0, 0.0])
    np.testing.assert_array_equal(g.payoff((0, 0), 1), [4.0, 0.0])


def test_game3_payoff_spot_checks():
    g = catalog.get("game3").payload
    np.testing.assert_array_equal(g.payoff((1, 1), 0), [3.0, 2.0])
    np.testing.assert_array_equal(g.payoff((1, 1), 1), [3.0, 2.0])
    np.testing.assert_array_equal(g.payoff((0, 0), 0), [4.0, 1.0])


def test_chicken_ce_table():
    sigma = catalog.get("chicken_ce").payload
    np.testing.assert_array_equal(sigma.probs, [[0.5, 0.25], [0.25, 0.0]])


def test_imbalancing_ce_table():
    sigma = catalog.get("imbalancing_ce").payload
    expected = np.zeros((3, 3))
    expected[0, 1] = 0.75
    expected[2, 1] = 0.25
    np.testing.assert_array_equal(sigma.probs, expected)


def test_catalog_games_round_trip_through_json():
    for entry in catalog.list_entries():
        if entry.kind != "game":
            continue
        payload = serialize.game_to_dict(entry.payload)
        back = serialize.game_from_dict(json.loads(json.dumps(payload)))
        np.testing.assert_array_equal(back.payoffs, entry.payload.payoffs)
        assert back.action_labels == entry.payload.action_labels


def test_catalog_strategies_round_trip_through_json():
    for entry in catalog.list_entries():
        if entry.kind == "correlated_strategy":
            data = json.loads(json.dumps(serialize.correlated_to_list(entry.payload)))
            back = serialize.correlated_from_list(data)
            np.testing.assert_array_equal(back.probs, entry.payload.probs)
        elif entry.kind == "profile":
            data = json.loads(json.dumps(serialize.profile_to_list(entry.payload)))
            back = serialize.profile_from_list(data)
            for a, b in zip(back, entry.payload):
                np.testing.assert_array_equal(a.probs, b.probs)
        elif entry.kind == "utility_pair":
            data = json.loads(json.dumps(serialize.utilities_to_list(entry.payload)))
            assert serialize.utilities_from_list(data) == entry.payload


def test_catalog_candidates_reproduce_known_verdicts(paper_utilities, identity_utilities):
    from monfg import (
        verify_ce_esr,
        verify_ce_ser_multi,
        verify_ce_ser_single,
    )

    chicken = catalog.get("chicken").payload
    assert verify_ce_esr(chicken, identity_utilities, catalog.get("chicken_ce").payload).verdict

    imb = catalog.get("imbalancing").payload
    imb_ce = catalog.get("imbalancing_ce").payload
    assert verify_ce_ser_single(imb, paper_utilities, imb_ce).verdict
    assert not verify_ce_ser_multi(imb, paper_utilities, imb_ce).verdict

    game2 = catalog.get("game2").payload
    assert verify_ce_ser_single(game2, paper_utilities, catalog.get("game2_ce").payload).verdict

    game3 = catalog.get("game3").payload
    g3ce = catalog.get("game3_ce").payload
    assert verify_ce_ser_single(game3, paper_utilities, g3ce).verdict
    assert verify_ce_ser_multi(game3, paper_utilities, g3ce).verdict


def test_report_serialization_shapes(imbalancing, paper_utilities, mixed_profile):
    from monfg import verify_ne_esr, verify_ne_ser

    for report in (
        verify_ne_esr(imbalancing, paper_utilities, mixed_profile),
        verify_ne_ser(imbalancing, paper_utilities, mixed_profile),
    ):
        data = serialize.report_to_dict(report)
        text = json.dumps(data)
        back = json.loads(text)
        assert back["verdict"] == report.verdict
        assert len(back["players"]) == 2
        for p, orig in zip(back["players"], report.players):
            assert p["max_gain"] == orig.max_gain
            assert "witness" in p and "type" in p["witness"]
