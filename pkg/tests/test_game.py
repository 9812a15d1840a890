import numpy as np
import pytest

from idnc_cde.game import (
    BackoffViolation, SessionComplete, advance_stage, allowed_actions,
    as_profile, backoff_vector, collision_indicator, player_utilities,
    profile_increment, utility, utility_game1, utility_game2,
)
from idnc_cde.verification import crossed_pair

C2 = 1.95 / 0.95


def test_profile_validation():
    with pytest.raises(ValueError):
        as_profile([0, 2])
    with pytest.raises(ValueError):
        as_profile([0, 1], M=3)


def test_collision_indicator():
    assert collision_indicator([1, 0]).tolist() == [0, 0]
    assert collision_indicator([1, 1, 0]).tolist() == [1, 1, 0]


def test_backoff_and_allowed_actions():
    B = backoff_vector([[0, 1], [0, 0]])
    assert B.tolist() == [1, 0]
    assert allowed_actions(0, B) == (0,)
    assert allowed_actions(1, B) == (0, 1)
    assert allowed_actions(0, B, game="game1") == (0, 1)


def test_pair_game1_single(pair):
    assert profile_increment([0, 1], pair).tolist() == [0, 1]
    assert utility_game1([0, 1], pair) == pytest.approx(-C2)


def test_pair_game1_collision(pair):
    assert utility_game1([1, 1], pair) == pytest.approx(-2.25)


def test_pair_game2_values(pair):
    assert utility_game2([0, 1], pair) == pytest.approx(-C2 - 1 - 0.5)
    assert utility_game2([0, 0], pair) == pytest.approx(-3.25)
    assert utility_game2([1, 0], pair) == pytest.approx(-3.75)


def test_expected_mode_matches_deterministic_on_pair(pair):
    # the only delayed player is the transmitter itself
    assert utility([0, 1], pair, "game2", "expected") == utility([0, 1], pair, "game2")


def test_realized_mode_needs_omega(pair):
    with pytest.raises(ValueError):
        utility([0, 1], pair, "game1", "realized")


def test_player_utilities_common(pair):
    us = player_utilities([1, 0], pair)
    assert us[0] == us[1]


def test_advance_delivery():
    s = crossed_pair()
    out = advance_stage(s, [1, 0], omega=np.ones((2, 2)))
    assert s.S.tolist() == [[0, 1], [0, 0]]
    assert s.ledger.cumulative_delay.tolist() == [1, 0]
    assert out.decoded == [(1, 0)]


def test_advance_erased_delivery():
    s = crossed_pair()
    advance_stage(s, [1, 0], omega=np.array([[1, 1], [0, 1]]))
    assert s.S.tolist() == [[0, 1], [1, 0]]
    assert s.ledger.cumulative_delay.tolist() == [1, 0]


def test_advance_collision_backs_off():
    s = crossed_pair()
    out = advance_stage(s, [1, 1], omega=np.ones((2, 2)))
    assert out.decoded == []
    assert s.ledger.cumulative_delay.tolist() == [1, 1]
    assert out.collided.tolist() == [1, 1]
    assert s.backoff().tolist() == [1, 1]
    with pytest.raises(BackoffViolation):
        advance_stage(s, [1, 0], omega=np.ones((2, 2)))
    advance_stage(s, [0, 0], omega=np.ones((2, 2)))
    assert s.backoff().tolist() == [1, 1]
    advance_stage(s, [0, 0], omega=np.ones((2, 2)))
    assert s.backoff().tolist() == [0, 0]


def test_game1_ignores_backoff():
    s = crossed_pair("game1")
    advance_stage(s, [1, 1], omega=np.ones((2, 2)))
    advance_stage(s, [1, 0], omega=np.ones((2, 2)))


def test_two_stage_completion():
    s = crossed_pair()
    advance_stage(s, [1, 0], omega=np.ones((2, 2)))
    advance_stage(s, [0, 1], omega=np.ones((2, 2)))
    assert s.complete()
    with pytest.raises(SessionComplete):
        advance_stage(s, [0, 1], omega=np.ones((2, 2)))


def test_running_cost_tracks_stage_costs():
    s = crossed_pair()
    c0 = float(s.completion().max())
    u = utility([0, 1], s, "game2")
    advance_stage(s, [0, 1], omega=np.ones((2, 2)))
    # game 2 cost of a stage = -(U) - previous max, carried on top of c0
    assert s.ledger.phi_prev["game2"] == pytest.approx(c0 + (-u - c0))
    assert s.ledger.phi_prev["game1"] == pytest.approx(C2)


def test_log_records(rng):
    s = crossed_pair()
    s.log = []
    advance_stage(s, [0, 1], rng)
    rec = s.log[0]
    assert list(rec) == ["stage", "profile", "omega", "decoded", "delay"]
    assert rec["stage"] == 1 and rec["profile"] == [0, 1]


def test_advance_needs_channel(pair):
    with pytest.raises(ValueError):
        advance_stage(pair, [0, 1])
