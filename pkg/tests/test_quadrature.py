import math

import numpy as np
import pytest

from lcricci.quadrature import (
    INTEGRANDS,
    IntegrationGrid,
    QuadratureError,
    deck_invariance,
    grid_refine_study,
    integrand_density,
    integrate_top_form,
    lcflat_check,
    total_scalar_check,
)


@pytest.mark.parametrize("n,resolution,tol", [(1, 8, 1e-14), (2, 8, 1e-13), (3, 8, 1e-12)])
def test_grid_reproduces_shell_volume(n, resolution, tol):
    grid = IntegrationGrid(n, resolution)
    exact = math.pi ** n / math.factorial(n) * (1 - 2.0 ** (-2 * n))
    assert grid.exact_volume() == pytest.approx(exact, rel=1e-15)
    assert abs(grid.total_weight() - exact) / exact <= tol


def test_grid_node_count():
    grid = IntegrationGrid(2, 4)
    z, w = grid.nodes()
    assert z.shape == (grid.size(), 2)
    assert w.shape == (grid.size(),)
    assert np.all(w > 0)
    r = np.linalg.norm(z, axis=1)
    assert np.all((r > 0.5) & (r < 1.0))


def test_grid_validation():
    with pytest.raises(QuadratureError):
        IntegrationGrid(2, 0)
    with pytest.raises(QuadratureError):
        IntegrationGrid(2, 4, 1.0, 0.5)


def test_zero_and_one_integrands():
    grid = IntegrationGrid(2, 8)
    assert integrate_top_form("flat:n=2", "zero", grid).value == 0
    one = integrate_top_form("flat:n=2", "one", grid).value
    assert one == pytest.approx(grid.exact_volume(), rel=1e-13)


def test_volume_density_is_omega_to_the_n():
    # omega^n = n! 2^n det g times Lebesgue measure
    z = np.array([[1.0, 0.0]])
    dens = integrand_density("hopfp:n=2", "volume", z)
    assert dens[0] == pytest.approx(2 * 4 * 0.5, rel=1e-14)


def test_non_hopf_metric_rejected_for_curvature_integrands():
    with pytest.raises(QuadratureError):
        integrate_top_form("flat:n=2", "scalar", IntegrationGrid(2, 4))


def test_dimension_mismatch():
    with pytest.raises(QuadratureError):
        integrate_top_form("hopf0:n=2", "volume", IntegrationGrid(3, 4))


def test_known_integrands():
    assert set(INTEGRANDS) >= {"zero", "one", "volume", "scalar", "ricci_wedge",
                               "dbar_star_norm", "ddbar_f"}


@pytest.mark.parametrize("metric", ["hopf0:n=2", "hopfp:n=2"])
def test_total_scalar_identity(metric):
    out = total_scalar_check(metric, resolution=8)
    assert out["relative_residual"] <= 1e-3
    assert out["lhs"] > 0


def test_hopf_perturbed_volume_closed_form():
    # det g |z|^{2n} = (1/2) for n = 2, so omega^2 = 4 / |z|^4 against Lebesgue,
    # and the shell 1/2 < |z| <= 1 has volume 2 pi^2 log 2 for 1/|z|^4
    value = integrate_top_form("hopfp:n=2", "volume", IntegrationGrid(2, 8)).value
    assert value == pytest.approx(4 * 2 * math.pi ** 2 * math.log(2), rel=1e-12)


def test_lcflat_identity_n2():
    out = lcflat_check("hopfp:n=2", resolution=8)
    assert out["precondition"]
    assert out["gauduchon_max_residual"] <= 1e-6
    assert out["relative_residual"] <= 1e-3
    assert out["ratio"] == pytest.approx(1.0, rel=1e-6)


def test_lcflat_ratio_n3_is_two():
    out = lcflat_check("hopfp:n=3", resolution=4)
    assert out["ratio"] == pytest.approx(2.0, rel=1e-4)


@pytest.mark.parametrize("integrand", ["volume", "scalar"])
def test_deck_invariance(integrand):
    out = deck_invariance("hopfp:n=2", integrand, resolution=6)
    assert out["relative_difference"] <= 1e-10


def test_refinement_certified():
    study = grid_refine_study("hopfp:n=2", "scalar", resolution=4)
    assert study.resolutions == (4, 8, 16)
    assert study.certified
    assert not study.flagged


def test_imaginary_residue_small():
    res = integrate_top_form("hopfp:n=2", "ricci_wedge", IntegrationGrid(2, 6))
    assert res.imag_residue <= 1e-8 * abs(res.value)


def test_ddbar_f_integrates_to_zero():
    # int ddbar f ^ omega^{n-1} over a closed quotient vanishes when omega is Gauduchon;
    # here f is deck invariant because it depends on z only through z/|z|
    res = integrate_top_form("hopf0:n=2", "ddbar_f", IntegrationGrid(2, 8),
                             factor="x1^2/absq")
    scale = integrate_top_form("hopf0:n=2", "volume", IntegrationGrid(2, 8)).value
    assert abs(res.value) <= 1e-8 * scale


def test_integration_is_deterministic():
    grid = IntegrationGrid(2, 5)
    a = integrate_top_form("hopfp:n=2", "scalar", grid).to_json()
    b = integrate_top_form("hopfp:n=2", "scalar", grid).to_json()
    assert a == b
