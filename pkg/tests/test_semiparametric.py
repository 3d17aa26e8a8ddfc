import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from falsiflow.correspondence import Correspondence
from falsiflow.errors import Diverged, Infeasible, SupportMismatch, UnknownOutcome
from falsiflow.measure import align, make_distribution
from falsiflow.models import binary_response_pilot, example4_instance, pilot_distribution
from falsiflow.semiparametric import (
    AscentOptions,
    SemiparametricModel,
    dual_objective,
    g_lambda,
    maximize_dual,
    moment_diagnostics,
    primal_lp,
)

FAST = AscentOptions(max_iter=300, stall_window=100)


@pytest.fixture(scope="module")
def pilot_half():
    return binary_response_pilot(0.5)


def aligned(model, p):
    return align(p, model.correspondence.outcome_support)


def test_g_lambda_zero_multiplier(pilot_half):
    value, _ = g_lambda(pilot_half, "(1,1)", [0.0, 0.0])
    assert value == 0.0


def test_g_lambda_pilot_quarter(pilot_half):
    # at lambda=(0.25, 0) the minimum for (Z=1, X=1) is -0.25, attained on the
    # cell x=1, eps <= -1 where the moment vector is (1, 0)
    value, argmin = g_lambda(pilot_half, "(1,1)", [0.25, 0.0])
    assert value == pytest.approx(-0.25)
    x, e = argmin.strip("()").split(",")
    assert x == "1" and float(e) <= -1.0


def test_pilot_moment_values():
    eta = 0.5
    m = binary_response_pilot(eta, epsilon_grid=[-1.5, -0.5, 0.5, 1.5])
    j = m.correspondence.latent_support.index("(1,-1.5)")
    assert m.moments[0, j] == pytest.approx(2 * (1 - eta))
    assert m.moments[1, j] == pytest.approx(0.0)


def test_g_lambda_unknown_outcome(pilot_half):
    with pytest.raises(UnknownOutcome):
        g_lambda(pilot_half, "nope", [0.0, 0.0])


def test_dual_objective_zero_lambda(pilot_half):
    p = aligned(pilot_half, pilot_distribution(0.4, 0.6))
    value, grad = dual_objective(pilot_half, p, [0.0, 0.0])
    assert value == 0.0
    assert grad.shape == (2,)


def test_dual_objective_support_mismatch(pilot_half):
    with pytest.raises(SupportMismatch):
        dual_objective(pilot_half, make_distribution([("a", 1.0)]), [0.0, 0.0])


@settings(max_examples=25, deadline=None)
@given(
    st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
    st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
)
def test_dual_objective_concave_midpoint(l1, l2):
    model = binary_response_pilot(0.3, epsilon_grid=[-1.5, -0.5, 0.5, 1.5])
    p = aligned(model, pilot_distribution(0.45, 0.55))
    l1, l2 = np.array(l1), np.array(l2)
    f1, _ = dual_objective(model, p, l1)
    f2, _ = dual_objective(model, p, l2)
    fmid, _ = dual_objective(model, p, (l1 + l2) / 2)
    assert fmid >= (f1 + f2) / 2 - 1e-12


@settings(max_examples=25, deadline=None)
@given(
    st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
    st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
)
def test_supergradient_inequality(l1, l2):
    model = binary_response_pilot(0.7, epsilon_grid=[-1.5, -0.5, 0.5, 1.5])
    p = aligned(model, pilot_distribution(0.5, 0.8))
    l1, l2 = np.array(l1), np.array(l2)
    f1, grad = dual_objective(model, p, l1)
    f2, _ = dual_objective(model, p, l2)
    assert f2 <= f1 + grad @ (l2 - l1) + 1e-12


def test_compatible_pilot_T_zero(pilot_half):
    p = aligned(pilot_half, pilot_distribution(0.3, 0.7))
    cert = maximize_dual(pilot_half, p, FAST)
    assert cert.compatible
    assert cert.T <= 1e-6


def test_incompatible_pilot_matches_primal():
    model = binary_response_pilot(0.3)
    p = aligned(model, pilot_distribution(0.5, 0.5))
    cert = maximize_dual(model, p, FAST)
    assert cert.T > 1e-6
    value, _ = primal_lp(model, p)
    assert abs(cert.T - value) <= 1e-5


def test_example4_T(pilot_half):
    model, p = example4_instance(100)
    cert = maximize_dual(model, p, FAST)
    assert cert.T == pytest.approx(0.01, abs=1e-5)


def test_no_moments_certificate():
    g = Correspondence.from_map({"u": ["a", "b"]})
    model = SemiparametricModel(g, np.zeros((0, 1)))
    p = make_distribution([("a", 0.5), ("b", 0.5)])
    cert = maximize_dual(model, p)
    assert cert.T == 0.0
    assert cert.iterations == 0


def test_weak_duality_random_lambdas():
    model = binary_response_pilot(0.4, epsilon_grid=[-1.5, -0.5, 0.5, 1.5])
    p = aligned(model, pilot_distribution(0.6, 0.7))
    value, _ = primal_lp(model, p)
    rng = np.random.default_rng(9)
    for _ in range(25):
        lam = rng.normal(scale=3.0, size=2)
        obj, _ = dual_objective(model, p, lam)
        assert obj <= value + 1e-9


def test_primal_lp_infeasible_moments():
    g = Correspondence.from_map({"u1": ["a"], "u2": ["a"]})
    model = SemiparametricModel(g, np.array([[1.0, 2.0]]))  # all m1(u) > 0
    p = make_distribution([("a", 1.0)])
    with pytest.raises(Infeasible):
        primal_lp(model, p)


def test_maximize_dual_diverges_on_empty_V():
    g = Correspondence.from_map({"u1": ["a"], "u2": ["a"]})
    model = SemiparametricModel(g, np.array([[1.0, 2.0]]))
    p = make_distribution([("a", 1.0)])
    with pytest.raises(Diverged):
        maximize_dual(model, p, AscentOptions(max_iter=2000, stall_window=100))


def test_vacuous_moments_reduce_to_parametric_free_nu():
    g = Correspondence.from_map({"u1": ["a"], "u2": ["b"]})
    model = SemiparametricModel(g, np.zeros((1, 2)))
    p = make_distribution([("a", 0.4), ("b", 0.6)])
    value, _ = primal_lp(model, p)
    assert value == pytest.approx(0.0, abs=1e-9)


def test_singleton_V_recovers_parametric():
    # indicator moments pin nu = (0.3, 0.7) exactly
    from falsiflow.transport import solve_zero_one

    g = Correspondence.from_map({"u1": ["a"], "u2": ["a", "b"]})
    moments = np.array([[1.0 - 0.3, -0.3], [-0.7, 1.0 - 0.7]])
    model = SemiparametricModel(g, moments)
    nu = make_distribution([("u1", 0.3), ("u2", 0.7)])
    for masses in [(0.5, 0.5), (0.9, 0.1), (0.2, 0.8)]:
        p = make_distribution([("a", masses[0]), ("b", masses[1])])
        value, _ = primal_lp(model, p)
        assert value == pytest.approx(solve_zero_one(p, nu, g).primal_value, abs=1e-8)


def test_minimizer_map_covers_outcomes(pilot_half):
    p = aligned(pilot_half, pilot_distribution(0.2, 0.9))
    cert = maximize_dual(pilot_half, p, FAST)
    assert set(cert.minimizer_map) == set(pilot_half.correspondence.outcome_support)
    assert set(cert.minimizer_map.values()) <= set(pilot_half.correspondence.latent_support)


def test_diagnostics_pilot(pilot_half):
    rep = moment_diagnostics(pilot_half)
    assert rep["bounded"] and rep["slater"]
    assert not rep["truncated_grid"]


def test_diagnostics_example4_flags_truncation():
    model, _ = example4_instance(100)
    rep = moment_diagnostics(model)
    assert rep["truncated_grid"]
    assert rep["notes"]


def test_diagnostics_empty_moments():
    g = Correspondence.from_map({"u": ["a"]})
    model = SemiparametricModel(g, np.zeros((0, 1)))
    rep = moment_diagnostics(model)
    assert rep["n_moments"] == 0 and rep["slater"]
