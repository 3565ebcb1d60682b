import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ordinal_potential import (
    admits_ordinal_potential,
    build_deviation_graph,
    check_proposition,
    common_interest_game,
    compute_potential,
    graph_potential,
    make_game,
    potentialized_game,
    profile_index,
    pure_nash,
    random_game,
    strictly_dominated_actions,
    verify_potential,
)
from ordinal_potential.potential import potential_report, verify_graph_potential

from conftest import (
    chain_graph,
    constant_game,
    coordination_game,
    h_family,
    has_weak_improvement_cycle,
    mixed_games,
    voorneveld_nolde_game,
)


def test_chain_potential():
    phi = graph_potential(chain_graph())
    assert phi.values.tolist() == [0, 1, 3, 8, 9]


def test_chain_verification_all_pass():
    report = verify_graph_potential(chain_graph(), [0, 1, 3, 8, 9])
    assert report.passed
    assert [c.name for c in report.checks] == [
        "scc_constancy", "edge_slack", "bellman_minimality", "ordinal_potential"]


def test_constant_game_potential_zero():
    phi = compute_potential(constant_game((3, 2)))
    assert np.all(phi.values == 0)
    assert phi.condensation.num_components == 1


def test_figure3_potential():
    phi = compute_potential(voorneveld_nolde_game())
    assert phi.values.reshape(3, 3).tolist() == [[0, 2, 0], [1, 0, 0], [0, 0, 1]]
    assert phi.component_values[phi.component_of[0]] == 0


def test_figure2_potentialized():
    pot = potentialized_game(coordination_game())
    expected = np.zeros(9)
    expected[0] = 3
    assert np.array_equal(pot.utilities, [expected, expected])


@pytest.mark.parametrize("h", [1.5, 2, 10, 100])
def test_h_family_potentialized_zero(h):
    assert np.all(potentialized_game(h_family(h)).utilities == 0)


def test_h_family_verification():
    game = h_family(2)
    report = verify_potential(game, compute_potential(game))
    assert report["scc_constancy"].passed
    assert report["edge_slack"].passed
    assert report["bellman_minimality"].passed
    check = report["ordinal_potential"]
    assert not check.passed
    assert check.witness["weight"] > 0 and check.witness["potential_difference"] == 0


def test_verification_reports_witnesses():
    game = voorneveld_nolde_game()
    phi = compute_potential(game)
    bumped = phi.values.copy()
    bumped[profile_index((0, 1), (3, 3))] += 1
    report = verify_graph_potential(build_deviation_graph(game), bumped)
    assert not report["bellman_minimality"].passed
    assert report["bellman_minimality"].witness["best_incoming"] == 2
    broken = phi.values.copy()
    broken[0] = 5
    report = verify_graph_potential(build_deviation_graph(game), broken)
    assert not report["scc_constancy"].passed


def test_common_interest_games_verify_fully():
    rng = np.random.default_rng(0)
    for _ in range(100):
        game = common_interest_game((3, 3), rng.integers(0, 5, size=9))
        report = verify_potential(game, compute_potential(game))
        assert report.passed, report.to_dict()


def test_figure2_proposition():
    game = coordination_game()
    report = check_proposition(game)
    assert report.passed
    assert {(0, 0), (1, 1), (2, 2)} <= pure_nash(potentialized_game(game))


def test_figure3_equilibria_retained():
    game = voorneveld_nolde_game()
    original = pure_nash(game)
    assert original == {(0, 1), (1, 0), (2, 2)}
    assert original <= pure_nash(potentialized_game(game))
    assert check_proposition(game).passed


def test_proposition_flags_violation():
    game = make_game(2, [2, 2], [[1, 1, 0, 0], [0, 0, 0, 0]])
    bogus = make_game(2, [2, 2], [[0, 0, 1, 1], [0, 0, 1, 1]])
    report = check_proposition(game, potentialized=bogus)
    assert not report["no_dominated_in_nash"].passed
    assert report["no_dominated_in_nash"].witness["action"] == 1


def test_strict_nash_preserved_random_4x4x4():
    for seed in range(1000):
        assert check_proposition(random_game([4, 4, 4], seed))["strict_nash_preserved"].passed


def test_dominated_action_survives_inside_scc():
    # hand-checked: column action 1 (3, 1, 2) is beaten by action 2 (8, 5, 8),
    # but the weak improvement cycle (0,1)->(0,2)->(1,2)->(1,0)->(0,0)->(0,1)
    # with weights 5, 0, 4, 0, 0 flattens the potential on all of them
    game = make_game(2, [3, 3], [[9, 6, 7, 9, 6, 7, 8, 3, 1], [3, 3, 8, 9, 1, 5, 8, 2, 8]])
    assert 1 in strictly_dominated_actions(game, 1)
    assert (0, 1) in pure_nash(potentialized_game(game))
    check = check_proposition(game)["no_dominated_in_nash"]
    assert not check.passed
    assert check.witness["same_component"] is True


def test_dominated_survivors_always_share_a_component():
    for game in mixed_games(600, seed=3):
        check = check_proposition(game)["no_dominated_in_nash"]
        if not check.passed:
            assert check.witness["same_component"] is True


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([(2, 2), (3, 3), (4, 4, 4), (3, 2, 2)]))
def test_potential_properties(seed, shape):
    game = random_game(shape, seed)
    phi = compute_potential(game)
    assert np.all(phi.values >= 0)
    report = verify_potential(game, phi)
    for name in ("scc_constancy", "edge_slack", "bellman_minimality"):
        assert report[name].passed
    assert report["ordinal_potential"].passed == admits_ordinal_potential(game)
    assert np.array_equal(compute_potential(game, reverse_tiebreak=True).values, phi.values)
    pot = potentialized_game(game, phi)
    assert admits_ordinal_potential(pot)
    assert pure_nash(potentialized_game(pot)) == pure_nash(pot)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2.0, 0.5, 3.0, 0.25]))
def test_scale_covariance(seed, c):
    game = random_game([3, 3], seed)
    scaled = make_game(2, [3, 3], game.utilities * c)
    assert np.array_equal(compute_potential(scaled).values, compute_potential(game).values * c)


def test_weak_cycle_oracle_sanity():
    assert has_weak_improvement_cycle(h_family(2))
    assert not has_weak_improvement_cycle(constant_game())


def test_potential_report_keys():
    game = voorneveld_nolde_game()
    rep = potential_report(game, compute_potential(game))
    assert rep["potential"] == [0, 2, 0, 1, 0, 0, 0, 0, 1]
    assert rep["admits_ordinal_potential"] is False
    assert rep["verification"]["checks"][0]["passed"]
