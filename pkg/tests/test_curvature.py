import numpy as np
import pytest

from lcricci.curvature import (
    Form11,
    WeightError,
    chern_curvature,
    chern_ricci,
    chern_scalar,
    curvature_bundle,
    lc_curvature,
    line_bundle_ricci,
)
from lcricci.metrics import evaluate_metric, parse_metric
from lcricci.suite import METRIC_SETS, sample_points


def test_flat_curvatures_vanish():
    b = curvature_bundle("flat:n=2", [0.3j, -0.2])
    for arr in (b.chern_full, b.chern_ricci.coeff, b.chern_scalar, b.lc_11, b.lc_ricci.coeff,
                b.lc_scalar):
        assert np.max(np.abs(arr)) == 0


@pytest.mark.parametrize("route", ["trace", "logdet"])
def test_conformal_exp_x1_chern_ricci_vanishes(route):
    m = evaluate_metric("conformal(flat:n=2; f=x1)", [0.4 + 0.1j, -0.3j])
    assert chern_ricci(m, route).max_abs() < 1e-6


@pytest.mark.parametrize("route", ["trace", "logdet"])
def test_hopf_perturbed_chern_ricci_at_unit_point(route):
    m = evaluate_metric("hopfp:n=2", [1, 0])
    np.testing.assert_allclose(chern_ricci(m, route).coeff, np.diag([0.0, 2.0]), atol=1e-6)


def test_hopf_perturbed_chern_scalar_at_unit_point():
    assert chern_scalar(evaluate_metric("hopfp:n=2", [1, 0])) == pytest.approx(4, abs=1e-10)


def test_fubini_study_scalar_at_origin():
    assert chern_scalar(evaluate_metric("fs:n=1", [0])) == pytest.approx(2, abs=1e-10)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_fubini_study_is_kahler_einstein(n):
    spec = parse_metric(f"fs:n={n}")
    m = evaluate_metric(spec, sample_points(spec, 20, seed=0))
    ric = chern_ricci(m).coeff
    np.testing.assert_allclose(ric, (n + 1) * m.g, atol=1e-10)
    np.testing.assert_allclose(chern_scalar(m), n * (n + 1), atol=1e-9)


@pytest.mark.parametrize("text", METRIC_SETS["default"])
def test_chern_invariants(text):
    spec = parse_metric(text)
    m = evaluate_metric(spec, sample_points(spec, 20, seed=1))
    ric = chern_ricci(m)
    assert ric.hermitian_defect() < 1e-10
    assert np.max(np.abs(np.imag(chern_scalar(m, ric)))) < 1e-10
    assert (ric - chern_ricci(m, "logdet")).max_abs() <= 1e-6


def test_chern_curvature_symmetries():
    spec = parse_metric("conformal(hopfp:n=3; f=sin(x1)*y2)")
    m = evaluate_metric(spec, sample_points(spec, 10, seed=2))
    r = chern_curvature(m)
    # conj(R_{i jbar k lbar}) = R_{j ibar l kbar}
    swapped = np.conj(np.einsum("...jilk->...ijkl", r))
    assert np.max(np.abs(r - swapped)) < 1e-8


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("mode,tol", [("analytic", 1e-6), ("fd", 1e-4)])
def test_hopf_perturbed_is_lc_ricci_flat(n, mode, tol):
    spec = parse_metric(f"hopfp:n={n}")
    m = evaluate_metric(spec, sample_points(spec, 30, seed=0), mode)
    lc = lc_curvature(m)
    assert lc.lc_ricci.max_abs() <= tol
    assert np.max(np.abs(lc.lc_scalar)) <= 10 * tol


@pytest.mark.parametrize("text", ["flat:n=2", "fs:n=2", "fs:n=3"])
def test_kahler_lc_ricci_equals_chern_ricci(text):
    spec = parse_metric(text)
    m = evaluate_metric(spec, sample_points(spec, 20, seed=3))
    assert (lc_curvature(m).lc_ricci - chern_ricci(m)).max_abs() <= 1e-6


def test_lc_lowering_convention():
    spec = parse_metric("hopf0:n=2")
    m = evaluate_metric(spec, sample_points(spec, 5, seed=3))
    lc = lc_curvature(m)
    np.testing.assert_allclose(lc.lc_lowered, np.einsum("...ijks,...sl->...ijkl", lc.lc_11, m.g),
                               atol=1e-15)


def test_line_bundle_trivial_weight():
    assert line_bundle_ricci("1", [0.2 + 1j, 0]).max_abs() == 0


def test_line_bundle_canonical_weight_at_i():
    c = line_bundle_ricci("y1^2", [1j, 0]).coeff
    assert c[0, 0] == pytest.approx(-0.5, abs=1e-8)
    assert np.max(np.abs(c - np.diag([c[0, 0], 0]))) <= 1e-8


def test_line_bundle_canonical_weight_at_2i():
    c = line_bundle_ricci("y1^2", [2j, 0]).coeff
    assert c[0, 0] == pytest.approx(-1 / 8, abs=1e-8)


def test_line_bundle_profile():
    rng = np.random.default_rng(0)
    w = rng.uniform(-1, 1, 20) + 1j * rng.uniform(0.5, 2.0, 20)
    z = np.stack([w, np.zeros(20)], axis=1)
    c = line_bundle_ricci("y1^2", z).coeff
    np.testing.assert_allclose(c[:, 0, 0], -1 / (2 * w.imag ** 2), atol=1e-8)


def test_line_bundle_rejects_non_positive_weight():
    with pytest.raises(WeightError):
        line_bundle_ricci("y1", [-1j, 0])


def test_form11_reality():
    assert Form11(np.array([[1, 2j], [-2j, 3]])).is_real()
    assert not Form11(np.array([[1j, 0], [0, 1]])).is_real()
