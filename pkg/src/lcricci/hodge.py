"""Torsion, the codifferential of the metric form, and related identities.

Conventions:

* ``Form10(a)`` is a_i dz^i and ``Form01(b)`` is b_j dzbar^j (no implicit
  factors).
* ``Form21(T)`` stores the torsion with the sqrt(-1) stripped and
  antisymmetric in its first two slots:
  d omega = sqrt(-1) sum_{k<i} T_{k i, jbar} dz^k ^ dz^i ^ dzbar^j, where
  T_{k i, jbar} = d_k g_{i jbar} - d_i g_{k jbar}.
* (1,1)-forms are :class:`~lcricci.curvature.Form11` (sqrt(-1) implicit).

Two independent routes give dbar^* omega: a g-contraction of the torsion
(:func:`dbar_star_omega_lambda`) and twice the conjugated trace of the mixed
connection coefficients (:func:`dbar_star_omega_gamma`).  With the
contraction written as a_i = sqrt(-1) g^{l kbar} T_{i l, kbar} the two agree
exactly; no extra normalisation factor is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import forms
from .connection import ConnectionCoeffs, lc_coefficients
from .curvature import OUTER_ORDER, Form11, chern_ricci, lc_curvature, outer_step
from .linalg import wirtinger_gradients, wirtinger_hessians
from .metrics import MetricValue, evaluate_metric


@dataclass(frozen=True)
class Form10:
    coeff: np.ndarray

    def conj(self) -> "Form01":
        return Form01(np.conj(self.coeff))


@dataclass(frozen=True)
class Form01:
    coeff: np.ndarray

    def conj(self) -> Form10:
        return Form10(np.conj(self.coeff))


@dataclass(frozen=True)
class Form21:
    coeff: np.ndarray

    def antisymmetry_defect(self) -> float:
        t = self.coeff
        return float(np.max(np.abs(t + np.swapaxes(t, -3, -2)), initial=0.0))


def _metric_value(metric, p=None, mode="analytic", step=None, second=True) -> MetricValue:
    if isinstance(metric, MetricValue):
        return metric
    return evaluate_metric(metric, p, mode, step, second=second)


def torsion_form(metric, p=None, mode="analytic", step=None) -> Form21:
    """Antisymmetrised holomorphic derivative of the metric: the torsion d omega."""
    m = _metric_value(metric, p, mode, step, second=False)
    d = m.jet.d_hol
    return Form21(d - np.swapaxes(d, -3, -2))


def dbar_star_omega_lambda(metric, p=None, mode="analytic", step=None) -> Form10:
    """dbar^* omega = sqrt(-1) Lambda d omega, as a g-trace of the torsion."""
    m = _metric_value(metric, p, mode, step, second=False)
    t = torsion_form(m).coeff
    return Form10(1j * np.einsum("...lk,...ilk->...i", m.g_inv, t))


def dbar_star_omega_gamma(c: ConnectionCoeffs) -> Form10:
    """dbar^* omega = 2 sqrt(-1) conj(Gamma^k_{ibar k}) dz^i."""
    return Form10(2j * np.conj(np.einsum("...kik->...i", c.gamma_mixed)))


def d_star_omega_lambda(metric, p=None, mode="analytic", step=None) -> Form01:
    """d^* omega from the antiholomorphic torsion, computed without conjugating
    the holomorphic route: b_i = -sqrt(-1) g^{k lbar}(d_ibar g_{k lbar} - d_lbar g_{k ibar})."""
    m = _metric_value(metric, p, mode, step, second=False)
    da = m.jet.d_anti
    contracted = np.einsum("...kl,...ikl->...i", m.g_inv, da) - np.einsum("...kl,...lki->...i", m.g_inv, da)
    return Form01(-1j * contracted)


def dbar_star_field(spec, mode="analytic", step=None):
    """z -> coefficients of dbar^* omega (connection route)."""

    def fieldfn(z):
        m = evaluate_metric(spec, z, mode, step, second=False)
        return dbar_star_omega_gamma(lc_coefficients(m)).coeff

    return fieldfn


def dbar_dbar_star_omega(metric, p=None, mode="analytic", step=None) -> Form11:
    """dbar dbar^* omega; with dbar^* omega = a_i dz^i the coefficient is sqrt(-1) d_jbar a_i."""
    m = _metric_value(metric, p, mode, step, second=False)
    _, d_anti = wirtinger_gradients(dbar_star_field(m.spec, m.mode, m.step), m.z, outer_step(m),
                                    m.spec.in_domain, OUTER_ORDER)
    return Form11(1j * np.swapaxes(d_anti, -1, -2))


def d_d_star_omega(metric, p=None, mode="analytic", step=None) -> Form11:
    """d d^* omega by its own stencil: with d^* omega = b_j dzbar^j the
    coefficient is -sqrt(-1) d_i b_j."""
    m = _metric_value(metric, p, mode, step, second=False)
    field = dbar_star_field(m.spec, m.mode, m.step)
    d_hol, _ = wirtinger_gradients(lambda z: np.conj(field(z)), m.z, outer_step(m), m.spec.in_domain,
                                   OUTER_ORDER)
    return Form11(-1j * d_hol)


def second_order_form(metric, p=None, mode="analytic", step=None) -> Form11:
    """(d d^* omega + dbar dbar^* omega) / 2.

    d d^* omega is taken as the conjugate transpose of dbar dbar^* omega,
    which holds because omega is real.
    """
    b = dbar_dbar_star_omega(metric, p, mode, step).coeff
    return Form11(0.5 * (b + np.conj(np.swapaxes(b, -1, -2))))


def lc_ricci_via_identity(metric, p=None, mode="analytic", step=None) -> Form11:
    """Ric(omega) - (d d^* omega + dbar dbar^* omega) / 2."""
    m = _metric_value(metric, p, mode, step)
    return chern_ricci(m, "trace") - second_order_form(m)


def lc_ricci_direct(metric, p=None, mode="analytic", step=None) -> Form11:
    return lc_curvature(_metric_value(metric, p, mode, step, second=False)).lc_ricci


def pointwise_inner_11(a: Form11, b: Form11, m: MetricValue) -> np.ndarray:
    """<a, b> = a_{i jbar} conj(b_{k lbar}) g^{i kbar} g^{l jbar}; <omega, omega> = n."""
    return np.einsum("...ij,...kl,...ik,...lj->...", a.coeff, np.conj(b.coeff), m.g_inv, m.g_inv)


def pointwise_inner_10(a: Form10, b: Form10, m: MetricValue) -> np.ndarray:
    """<a, b> = g^{i jbar} a_i conj(b_j)."""
    return np.einsum("...ij,...i,...j->...", m.g_inv, a.coeff, np.conj(b.coeff))


def metric_form(m: MetricValue) -> Form11:
    return Form11(m.g)


# --------------------------------------------------------------------------
# Gauduchon and balanced residuals


def _wedge_power_coeff_field(spec, k):
    """z -> stacked coefficients of omega^k over a fixed monomial list."""
    n = spec.n

    def fieldfn(z):
        w = forms.power(forms.form11(spec.field(z), n), k)
        return np.stack([w[key] for key in sorted(w)], axis=-1)

    probe = forms.power(forms.form11(np.eye(n, dtype=complex), n), k)
    return fieldfn, sorted(probe)


def _wedge_power_jets(m: MetricValue, k: int, fd_coefficients: bool) -> dict:
    if not fd_coefficients:
        jet = m.jet
        omega = forms.omega_jet_form(jet.value, jet.d_hol, jet.d_anti, jet.d_mixed)
        return forms.power(omega, k)
    # differentiate the wedge-power coefficient fields on the stencil
    fieldfn, keys = _wedge_power_coeff_field(m.spec, k)
    value = fieldfn(m.z)
    h = outer_step(m)
    d_hol, d_anti = wirtinger_gradients(fieldfn, m.z, h, m.spec.in_domain, OUTER_ORDER)
    mixed, _ = wirtinger_hessians(fieldfn, m.z, h, m.spec.in_domain, OUTER_ORDER)
    return {key: forms.Jet(value[..., a], d_hol[..., a], d_anti[..., a], mixed[..., a])
            for a, key in enumerate(keys)}


def gauduchon_residual(metric, p=None, mode="analytic", step=None) -> np.ndarray:
    """Top-degree coefficient of d dbar omega^{n-1}; shape (..., 1).

    ``mode='analytic'`` pushes the metric jet through the wedge power by the
    Leibniz rule; ``mode='fd'`` differentiates the wedge-power coefficient
    fields on a stencil.
    """
    m = _metric_value(metric, p, mode if mode != "fd" else "analytic", step)
    n = m.n
    if n < 2:
        raise ValueError("Gauduchon residual needs n >= 2")
    w = _wedge_power_jets(m, n - 1, mode == "fd")
    top = forms.ddbar(w, n).get(forms.top_key(n), np.zeros(m.z.shape[:-1], dtype=complex))
    return np.asarray(top)[..., None]


def balanced_residual(metric, p=None, mode="analytic", step=None) -> np.ndarray:
    """All coefficients of d omega^{n-1}; shape (..., number of monomials)."""
    m = _metric_value(metric, p, mode if mode != "fd" else "analytic", step)
    n = m.n
    w = _wedge_power_jets(m, n - 1, mode == "fd")
    d = forms.exterior_d(w, n)
    if not d:
        return np.zeros(m.z.shape[:-1] + (1,), dtype=complex)
    return np.stack([np.broadcast_to(d[key], m.z.shape[:-1]) for key in sorted(d)], axis=-1)
