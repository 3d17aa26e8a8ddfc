import numpy as np
import pytest

from falsiflow.correspondence import capacity_fp, core_deficiency_bruteforce
from falsiflow.errors import (
    BadParameters,
    BadRule,
    GridTooCoarse,
    NotMonotone,
    SupportMismatch,
)
from falsiflow.measure import DENOMINATOR, align, empirical, make_distribution
from falsiflow.models import (
    SLACK_OUTCOME,
    SelectionRule,
    binary_response_pilot,
    entry_equilibria,
    entry_game,
    example4_instance,
    interval_deficiency,
    line_network_game,
    moment_inequality_model,
    pilot_distribution,
    sample_distribution,
    search_game,
    simulate,
    uniform_grid_2d,
)
from falsiflow.semiparametric import maximize_dual, primal_lp
from falsiflow.transport import compatibility_verdict, solve_zero_one


# --- line network -----------------------------------------------------------

def test_line_network_degenerate_region():
    g, nu = line_network_game([1.0, 0.0, 0.0, 0.0])
    delta = make_distribution([("(0,0,0)", 1.0)])
    p = align(delta, g.outcome_support)
    assert compatibility_verdict(p, nu, g).compatible
    # every other outcome has capacity 0, so any mass elsewhere falsifies
    other = align(make_distribution([("(0,0,0)", 0.9), ("(0,1,1)", 0.1)]), g.outcome_support)
    assert not compatibility_verdict(other, nu, g).compatible


def test_line_network_binding_inequality():
    g, nu = line_network_game([0.4, 0.2, 0.2, 0.2])
    p = make_distribution(
        [("(0,0,0)", 0.3), ("(0,1,1)", 0.25), ("(1,1,0)", 0.25), ("(1,1,1)", 0.2)]
    )
    assert not compatibility_verdict(p, nu, g).compatible


def test_line_network_identity_masses_compatible():
    g, nu = line_network_game([0.4, 0.2, 0.2, 0.2])
    p = make_distribution(
        [("(0,0,0)", 0.4), ("(0,1,1)", 0.2), ("(1,1,0)", 0.2), ("(1,1,1)", 0.2)]
    )
    assert compatibility_verdict(p, nu, g).compatible


def test_line_network_arity():
    with pytest.raises(BadParameters):
        line_network_game([0.5, 0.5])


# --- entry game --------------------------------------------------------------

def test_entry_equilibria_multiplicity_cell():
    assert entry_equilibria(-1.0, -1.0, 0.5, 0.5) == ("(0,1)", "(1,0)")


def test_entry_equilibria_unique_cells():
    assert entry_equilibria(-1.0, -1.0, -1.5, -1.5) == ("(0,0)",)
    assert entry_equilibria(-1.0, -1.0, 1.5, 1.5) == ("(1,1)",)
    assert entry_equilibria(-1.0, -1.0, 1.5, -1.5) == ("(1,0)",)


def test_entry_game_multiplicity_mass_exact():
    g, nu = entry_game(-1.0, -1.0)
    lab = next(u for u in g.latent_support if set(g.outcomes_of(u)) == {"(0,1)", "(1,0)"})
    assert nu.numerator(lab) == DENOMINATOR // 16


def test_entry_game_regions_partition_grid():
    grid = uniform_grid_2d(-2.0, 2.0, 10)
    _, nu = entry_game(-0.5, -1.5, grid=grid)
    assert sum(nu.numerators) == DENOMINATOR


def test_entry_game_rejects_nonnegative_delta():
    with pytest.raises(BadParameters):
        entry_game(0.5, -1.0)


def test_entry_game_16_inequalities_decide_compatibility():
    g, nu = entry_game(-1.0, -1.0)
    p = make_distribution([("(0,0)", 0.25), ("(0,1)", 0.375), ("(1,0)", 0.3125), ("(1,1)", 0.0625)])
    verdict = compatibility_verdict(p, nu, g)
    all_hold = all(
        sum(n for i, n in enumerate(p.numerators) if bits >> i & 1) <= capacity_fp(g, nu, bits)
        for bits in range(16)
    )
    assert verdict.compatible == all_hold is True


# --- search model -------------------------------------------------------------

def search_instance():
    nu = make_distribution([("e1", 0.2), ("e2", 0.3), ("e3", 0.5)])
    alpha = [("e1", 0.2), ("e2", 0.5), ("e3", 0.9)]
    return search_game(alpha, nu)


def test_search_outcomes_are_numeric_and_contain_zero():
    g, _ = search_instance()
    assert g.outcome_support == (0.0, 0.2, 0.5, 0.9)


def test_search_constant_zero_data_compatible():
    g, nu = search_instance()
    p = align(make_distribution([(0.0, 1.0)]), g.outcome_support)
    assert compatibility_verdict(p, nu, g).compatible


def test_search_pushforward_compatible():
    g, nu = search_instance()
    p = align(make_distribution([(0.2, 0.2), (0.5, 0.3), (0.9, 0.5)]), g.outcome_support)
    assert compatibility_verdict(p, nu, g).compatible


def test_search_requires_monotone_alpha():
    nu = make_distribution([("e1", 0.5), ("e2", 0.5)])
    with pytest.raises(NotMonotone):
        search_game([("e1", 0.9), ("e2", 0.2)], nu)


def test_search_alpha_keyed_to_nu():
    nu = make_distribution([("e1", 0.5), ("e2", 0.5)])
    with pytest.raises(SupportMismatch):
        search_game([("x", 0.1), ("y", 0.2)], nu)


def test_interval_criterion_equals_bruteforce_on_onesided():
    g, nu = search_instance()
    # shift 0.1 above the model's capacity onto the top effort level
    p = align(make_distribution([(0.0, 0.4), (0.9, 0.6)]), g.outcome_support)
    best_fp, labels, kind = interval_deficiency(g, nu, p)
    rep = core_deficiency_bruteforce(g, nu, p)
    assert best_fp == rep.value_fp == DENOMINATOR // 10
    assert kind == "upper" and labels == (0.9,)


def test_interval_criterion_counterexample_regression():
    # alternating deficiency signs defeat the interval classes: the
    # full-subset maximum is strictly larger
    nu = make_distribution([("e1", 0.1), ("e2", 0.6), ("e3", 0.3)])
    g, nu = search_game([("e1", 0.2), ("e2", 0.5), ("e3", 0.9)], nu)
    # per-effort deficiencies (+0.1, -0.5, +0.1)
    p = align(
        make_distribution([(0.0, 0.3), (0.2, 0.2), (0.5, 0.1), (0.9, 0.4)]),
        g.outcome_support,
    )
    best_fp, _, _ = interval_deficiency(g, nu, p)
    rep = core_deficiency_bruteforce(g, nu, p)
    assert rep.value_fp == DENOMINATOR // 5  # {0.2, 0.9} carries +0.1 +0.1
    assert best_fp == DENOMINATOR // 10
    assert rep.value_fp > best_fp


# --- pilot ---------------------------------------------------------------------

def test_pilot_structure():
    m = binary_response_pilot(0.5)
    g = m.correspondence
    assert g.outcome_support == ("(0,-1)", "(0,1)", "(1,-1)", "(1,1)")
    assert len(g.latent_support) == 2 * 41
    assert m.n_moments == 2


def test_pilot_boundary_tie_is_closed():
    m = binary_response_pilot(0.5, epsilon_grid=[-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5])
    # x=1, eps=-1: x + eps = 0 <= 0, so Z=1
    assert m.correspondence.outcomes_of("(1,-1)") == ("(1,1)",)
    # x=-1, eps=1: x + eps = 0 <= 0, so Z=1
    assert m.correspondence.outcomes_of("(-1,1)") == ("(1,-1)",)


def test_pilot_grid_too_coarse():
    with pytest.raises(GridTooCoarse):
        binary_response_pilot(0.5, epsilon_grid=[0.5, 1.5])


def test_pilot_eta_range():
    with pytest.raises(BadParameters):
        binary_response_pilot(0.0)


def test_pilot_compatible_and_incompatible_points():
    m = binary_response_pilot(0.3)
    sup = m.correspondence.outcome_support
    ok = maximize_dual(m, align(pilot_distribution(0.2, 0.6), sup))
    assert ok.T <= 1e-6
    bad = maximize_dual(m, align(pilot_distribution(0.5, 0.6), sup))
    assert bad.T > 1e-3


# --- moment inequalities / example 4 -------------------------------------------

def test_moment_inequality_dominance_rule():
    model = moment_inequality_model(["a", "b"], [[0.0], [0.5]], [[-1.0], [0.0], [1.0]])
    g = model.correspondence
    assert g.outcomes_of("-1") == (SLACK_OUTCOME,)
    assert g.outcomes_of("0") == ("a",)
    assert g.outcomes_of("1") == ("a", "b")


def test_moment_inequality_verdicts():
    # single phi(Y) = y - 0.25 on outcomes {0, 1}: E[phi] <= 0 iff P(1) <= 0.25
    model = moment_inequality_model(
        ["0", "1"], [[-0.25], [0.75]], [[-1.0], [-0.25], [0.0], [0.75], [1.0]]
    )
    sup = model.correspondence.outcome_support
    good = align(make_distribution([("0", 0.9), ("1", 0.1)]), sup)
    bad = align(make_distribution([("0", 0.1), ("1", 0.9)]), sup)
    assert maximize_dual(model, good).T <= 1e-6
    assert maximize_dual(model, bad).T > 1e-3


def test_moment_inequality_coarse_grid():
    with pytest.raises(GridTooCoarse):
        moment_inequality_model(["a"], [[2.0]], [[-1.0], [0.0]])


def test_example4_values():
    for m in (2, 10, 100, 1000):
        model, p = example4_instance(m)
        value, _ = primal_lp(model, p)
        assert value == pytest.approx(1 / m, abs=1e-9)


def test_example4_rejects_small_m():
    with pytest.raises(BadParameters):
        example4_instance(1)


# --- simulation -----------------------------------------------------------------

def test_simulate_deterministic():
    g, nu = entry_game(-1.0, -1.0)
    a = simulate(g, nu, SelectionRule("uniform-random"), 200, seed=3)
    b = simulate(g, nu, SelectionRule("uniform-random"), 200, seed=3)
    assert a == b


def test_simulate_zero_draws():
    g, nu = line_network_game([0.25, 0.25, 0.25, 0.25])
    assert simulate(g, nu, SelectionRule("first"), 0, seed=0) == []


def test_simulate_first_rule_pushforward_band():
    g, nu = entry_game(-1.0, -1.0)
    n = 10_000
    data = simulate(g, nu, SelectionRule("first"), n, seed=7)
    # under "first" the multiplicity region always reports (0,1)
    expected = {"(0,0)": 0.25, "(0,1)": 0.375, "(1,0)": 0.3125, "(1,1)": 0.0625}
    p_n = empirical(data)
    for y, q in expected.items():
        sigma = (q * (1 - q) / n) ** 0.5
        assert abs(p_n.mass(y) - q) <= 3 * sigma + 1e-9


def test_simulate_pushforward_is_compatible():
    g, nu = entry_game(-1.0, -1.0)
    push = make_distribution([("(0,0)", 0.25), ("(0,1)", 0.375), ("(1,0)", 0.3125), ("(1,1)", 0.0625)])
    assert compatibility_verdict(push, nu, g).compatible


def test_custom_rule_validated():
    g, nu = line_network_game([0.25, 0.25, 0.25, 0.25])
    bad = SelectionRule("custom", mapping={u: "(1,1,1)" for u in g.latent_support})
    with pytest.raises(BadRule):
        simulate(g, nu, bad, 5, seed=0)
    with pytest.raises(BadRule):
        SelectionRule("nonsense")


def test_sample_distribution_counts():
    p = make_distribution([("a", 0.5), ("b", 0.5)])
    data = sample_distribution(p, 1000, seed=1)
    assert len(data) == 1000
    assert set(data) == {"a", "b"}
