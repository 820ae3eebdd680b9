import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import model_i_sigma_x, model_ii_sigma_x

from nhknot.errors import DegeneratePointError, InvalidInputError
from nhknot.gauge import (
    CATALOG,
    FIGURE_GENERAL,
    GaugeChoice,
    a_map,
    apply_gauge,
    build_a,
    singular_values,
    svd_factors,
    v_matrix,
)
from nhknot.linalg2 import SIGMA_X, commutator_norm, dagger, frobenius, unitary_error
from nhknot.models import bloch_h, midpoint_grid, preset
from nhknot.topology import nh_winding

angles = st.floats(-10, 10, allow_nan=False)
general = st.builds(
    GaugeChoice,
    st.just("general"),
    angles,
    angles,
    angles,
    angles,
    st.integers(-3, 3),
)
gauges = st.one_of(st.sampled_from(CATALOG), general)


def test_parse_names_and_general():
    assert GaugeChoice.parse("sigma-x").kind == "sigma-x"
    assert GaugeChoice.parse("I-Sigma-Z").kind == "i-sigma-z"
    g = GaugeChoice.parse("general:1.5,0.5,0.25,0.75,1")
    assert (g.phi, g.alpha, g.beta, g.theta0, g.theta1) == (1.5, 0.5, 0.25, 0.75, 1)
    assert GaugeChoice.parse(g.name) == g


@pytest.mark.parametrize("text", ["pauli-w", "general:1,2,3", "sigma-x:1,2,3,4,5", "general:a,b,c,d,e"])
def test_parse_rejects(text):
    with pytest.raises(InvalidInputError):
        GaugeChoice.parse(text)


def test_fractional_theta_slope_rejected():
    with pytest.raises(InvalidInputError, match="integer"):
        GaugeChoice("general", theta1=0.5)


def test_v_matrix_k_dependent_examples():
    assert np.allclose(v_matrix(GaugeChoice("k-dependent"), 0.0), -1j * SIGMA_X, atol=1e-15)
    assert np.allclose(v_matrix(GaugeChoice("k-dependent"), math.pi / 2), [[-1j, 0], [0, 1]], atol=1e-15)


def test_v_matrix_general_figure_parameters_unitary():
    assert unitary_error(v_matrix(FIGURE_GENERAL, 0.0)) < 1e-15


@given(gauges, st.floats(-20, 20, allow_nan=False))
def test_gauges_unitary_and_periodic(g, k):
    v = v_matrix(g, k)
    assert unitary_error(v) < 1e-12
    assert np.abs(v_matrix(g, k + 2 * math.pi) - v).max() < 1e-12 * (1 + abs(k))


def test_build_a_examples():
    sq = math.sqrt
    sx = GaugeChoice("sigma-x")
    a = build_a(preset("model-i", 1.5), sx, math.pi)
    assert np.allclose(a, [[1, -sq(1.5)], [1, sq(1.5)]], atol=1e-12)
    assert np.allclose(a @ dagger(a), [[2.5, -0.5], [-0.5, 2.5]], atol=1e-12)
    a = build_a(preset("model-i", 0.5), sx, math.pi)
    assert np.allclose(a, [[-sq(0.5), 1], [sq(0.5), 1]], atol=1e-12)
    a = build_a(preset("model-ii", 1.5), sx, math.pi / 2)
    assert np.allclose(a, [[sq(2), -sq(2.5)], [sq(2), sq(2.5)]], atol=1e-12)


@pytest.mark.parametrize("omega", [0.5, 1.5, 30.0])
def test_closed_forms_on_full_grid(omega):
    k = midpoint_grid(1024)
    sx = GaugeChoice("sigma-x")
    assert np.abs(build_a(preset("model-i", omega), sx, k) - model_i_sigma_x(omega, k)).max() < 1e-10
    assert np.abs(build_a(preset("model-ii", omega), sx, k) - model_ii_sigma_x(omega, k)).max() < 1e-10


def test_direct_orientation_model_i_matches_printed_form_at_minus_k():
    k = midpoint_grid(256)
    a = build_a(preset("model-i", 1.5, k_sign=1), GaugeChoice("sigma-x"), k)
    assert np.abs(a - model_i_sigma_x(1.5, -k)).max() < 1e-10


def test_degenerate_point_error_carries_safe_k():
    with pytest.raises(DegeneratePointError) as info:
        build_a(preset("model-i", 1.0), GaugeChoice("sigma-x"), math.pi, omega=1.0)
    err = info.value
    assert err.k == math.pi and err.omega == 1.0
    assert 0 < abs(err.safe_k - math.pi) < 1e-6
    build_a(preset("model-i", 1.0), GaugeChoice("sigma-x"), err.safe_k)


def test_svd_factor_layout():
    f = svd_factors(preset("model-ii", 0.7), GaugeChoice("sigma-y"), 0.4)
    assert f.sigma[0] >= f.sigma[1] >= 0
    h = bloch_h(preset("model-ii", 0.7), 0.4)
    assert np.allclose(f.u @ np.diag(f.sigma**2) @ dagger(f.u), h, atol=1e-12)
    assert np.allclose(f.a, build_a(preset("model-ii", 0.7), GaugeChoice("sigma-y"), 0.4))


def test_reconstruction_random(rng):
    for _ in range(1000):
        family = ("model-i", "model-ii")[rng.integers(2)]
        omega = float(rng.uniform(1e-3, 5.0))
        k = float(rng.uniform(0, 2 * math.pi))
        if rng.random() < 0.5:
            g = CATALOG[rng.integers(4)]
        else:
            phi, alpha, beta, theta0 = rng.uniform(-math.pi, math.pi, 4)
            g = GaugeChoice("general", phi, alpha, beta, theta0, int(rng.integers(-3, 4)))
        m = preset(family, omega)
        h = bloch_h(m, k)
        a = build_a(m, g, k)
        assert frobenius(a @ dagger(a) - h) < 1e-10 * (1 + frobenius(h))


def test_singular_values_examples():
    assert np.allclose(singular_values(np.array([[1, -1], [1, 1]])), (math.sqrt(2), math.sqrt(2)))
    assert np.allclose(singular_values(SIGMA_X), (1, 1))
    s1, s2 = singular_values(build_a(preset("model-i", 0.5), GaugeChoice("sigma-x"), 0.0))
    assert s1 == pytest.approx(0, abs=1e-12) and s2 == pytest.approx(math.sqrt(3))


@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=8, max_size=8))
def test_singular_values_match_lapack(v):
    a = (np.array(v[:4]) + 1j * np.array(v[4:])).reshape(2, 2)
    s1, s2 = singular_values(a)
    ref = np.linalg.svd(a, compute_uv=False)
    assert s1 <= s2
    assert s2 == pytest.approx(ref[0], abs=1e-12 * (1 + ref[0]))
    assert s1 == pytest.approx(ref[1], abs=1e-12 * (1 + ref[0]))


def test_singular_values_gauge_invariant(rng):
    for _ in range(300):
        family = ("model-i", "model-ii")[rng.integers(2)]
        m = preset(family, float(rng.uniform(1e-2, 5.0)))
        k = float(rng.uniform(0, 2 * math.pi))
        ref = np.array(singular_values(build_a(m, CATALOG[0], k)))
        for g in CATALOG[1:] + (FIGURE_GENERAL,):
            assert np.abs(np.array(singular_values(build_a(m, g, k))) - ref).max() < 1e-12


@pytest.mark.parametrize("g", CATALOG + (FIGURE_GENERAL,), ids=lambda g: g.kind)
def test_factor_periodic(g):
    k = midpoint_grid(64)
    for family in ("model-i", "model-ii"):
        m = preset(family, 0.8)
        assert np.abs(build_a(m, g, k + 2 * math.pi) - build_a(m, g, k)).max() < 1e-10


def test_apply_gauge_identity_and_invariance(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    assert np.allclose(apply_gauge(a, GaugeChoice("general"), 0.3), a, atol=1e-15)
    b = apply_gauge(a, GaugeChoice("sigma-x"), 0.3)
    assert np.abs(b @ dagger(b) - a @ dagger(a)).max() < 1e-12


def test_post_gauge_changes_knot_but_keeps_h():
    m = preset("model-i", 0.5)
    amap = a_map(m, GaugeChoice("sigma-x"), post=FIGURE_GENERAL)
    k = midpoint_grid(256)
    a = amap(k)
    assert np.abs(a @ dagger(a) - bloch_h(m, k)).max() < 1e-12
    base = nh_winding(a_map(m, GaugeChoice("sigma-x"))).nu
    at_high = nh_winding(a_map(preset("model-i", 1.5), GaugeChoice("sigma-x"), post=FIGURE_GENERAL)).nu
    assert nh_winding(amap).nu == base == 0
    assert abs(at_high) == 1


def test_normality_recovers_linearly_at_degeneracy():
    m = preset("model-i", 1.0)
    offsets = np.array([1e-3, 1e-4, 1e-5, 1e-6])
    c = np.array([commutator_norm(build_a(m, GaugeChoice("sigma-x"), math.pi + d)) for d in offsets])
    ratios = c[:-1] / c[1:]
    assert np.all(np.abs(ratios - 10) < 0.5)
