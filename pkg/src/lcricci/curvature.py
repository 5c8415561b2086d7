"""Chern and Levi-Civita curvature, Ricci forms and scalar curvatures.

(1,1)-forms are stored by their coefficient matrix A with the sqrt(-1)
prefactor implicit: ``Form11(A)`` stands for sqrt(-1) A_{i jbar} dz^i ^ dzbar^j,
so a positive-definite metric has a positive-definite coefficient matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fielddsl
from .connection import ConnectionCoeffs, MissingJetError, coefficient_field, lc_coefficients
from .linalg import as_coords, log_det_hermitian, wirtinger_gradients, wirtinger_hessians
from .metrics import MetricValue, evaluate_metric


# Differentiation order for derivatives of derived fields (connection
# coefficients, dbar^* omega); the metric jet itself stays second order.
OUTER_ORDER = 4
OUTER_RELATIVE_STEP = 1e-3


def outer_step(m: MetricValue):
    """Step for derivatives of derived fields: the shared step when one was
    given, otherwise 1e-3 * max(1, |p|), where Richardson differences balance
    truncation against rounding."""
    if m.step is not None:
        return m.step
    return OUTER_RELATIVE_STEP * np.maximum(1.0, np.linalg.norm(m.z, axis=-1))


class WeightError(ValueError):
    pass


@dataclass(frozen=True)
class Form11:
    coeff: np.ndarray

    def hermitian_defect(self) -> float:
        a = self.coeff
        return float(np.max(np.abs(a - np.conj(np.swapaxes(a, -1, -2))), initial=0.0))

    def is_real(self, tol: float = 1e-10) -> bool:
        return self.hermitian_defect() <= tol

    def __sub__(self, other):
        return Form11(self.coeff - other.coeff)

    def __add__(self, other):
        return Form11(self.coeff + other.coeff)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeff), initial=0.0))


@dataclass(frozen=True)
class LCCurvature:
    """``lc_11[..., i, j, k, l]`` is frak R^l_{i jbar k}."""

    lc_11: np.ndarray
    lc_lowered: np.ndarray
    lc_ricci: Form11
    lc_scalar: np.ndarray


@dataclass(frozen=True)
class CurvatureBundle:
    chern_full: np.ndarray
    chern_ricci: Form11
    chern_scalar: np.ndarray
    lc_11: np.ndarray
    lc_lowered: np.ndarray
    lc_ricci: Form11
    lc_scalar: np.ndarray


def chern_curvature(m: MetricValue) -> np.ndarray:
    """R_{i jbar k lbar} = -d_i d_jbar g_{k lbar} + g^{p qbar} d_i g_{k qbar} d_jbar g_{p lbar}.

    Returned with index order ``[..., i, j, k, l]``.
    """
    jet = m.jet
    if jet.d_mixed is None:
        raise MissingJetError("Chern curvature needs mixed second derivatives")
    quad = np.einsum("...pq,...ikq,...jpl->...ijkl", m.g_inv, jet.d_hol, jet.d_anti)
    return -jet.d_mixed + quad


def _logdet_field(spec):
    return lambda z: log_det_hermitian(spec.field(z))


def chern_ricci(m: MetricValue, route: str = "trace") -> Form11:
    """Chern-Ricci form, either as the g-trace of the full tensor or as
    -d dbar log det g by finite differences of log det."""
    if route == "trace":
        return Form11(np.einsum("...kl,...ijkl->...ij", m.g_inv, chern_curvature(m)))
    if route == "logdet":
        mixed, _ = wirtinger_hessians(_logdet_field(m.spec), m.z, m.step, m.spec.in_domain)
        return Form11(-mixed)
    raise ValueError(f"unknown route {route!r}")


def trace_form(a: Form11 | np.ndarray, m: MetricValue) -> np.ndarray:
    """g^{i jbar} A_{i jbar}."""
    coeff = a.coeff if isinstance(a, Form11) else a
    return np.einsum("...ij,...ij->...", m.g_inv, coeff)


def chern_scalar(m: MetricValue, ricci: Form11 | None = None) -> np.ndarray:
    """Chern scalar curvature (real part; the imaginary residue is checked separately)."""
    ricci = chern_ricci(m) if ricci is None else ricci
    return trace_form(ricci, m)


def connection_derivatives(m: MetricValue):
    """Finite-difference derivatives of the coefficient fields around ``m.z``.

    Every stencil node recomputes the coefficients from the metric jet there.
    Returns ``(d_hol, d_anti)``, each ``(..., n, 2, n, n, n)``; slot 0 of the
    second axis is Gamma^k_{ij}, slot 1 is Gamma^k_{ibar j}.
    """
    fieldfn = coefficient_field(m.spec, m.mode, m.step)
    return wirtinger_gradients(fieldfn, m.z, outer_step(m), m.spec.in_domain, OUTER_ORDER)


def lc_curvature(m: MetricValue, c: ConnectionCoeffs | None = None, derivs=None) -> LCCurvature:
    """Levi-Civita (1,1)-curvature, its Ricci form and scalar.

    frak R^l_{i jbar k} = -(d_jbar Gamma^l_{ik} - d_i Gamma^l_{jbar k}
                          + Gamma^s_{ik} Gamma^l_{jbar s} - Gamma^s_{jbar k} Gamma^l_{s i})
    """
    c = lc_coefficients(m) if c is None else c
    d_hol, d_anti = connection_derivatives(m) if derivs is None else derivs
    dbar_gh = d_anti[..., 0, :, :, :]  # [j, l, i, k] = d_jbar Gamma^l_{ik}
    d_gm = d_hol[..., 1, :, :, :]  # [i, l, j, k] = d_i Gamma^l_{jbar k}
    gh, gm = c.gamma_hol, c.gamma_mixed
    lc = -(
        np.einsum("...jlik->...ijkl", dbar_gh)
        - np.einsum("...iljk->...ijkl", d_gm)
        + np.einsum("...sik,...ljs->...ijkl", gh, gm)
        - np.einsum("...sjk,...lsi->...ijkl", gm, gh)
    )
    lowered = np.einsum("...ijks,...sl->...ijkl", lc, m.g)
    ricci = np.einsum("...ijkk->...ij", lc)
    scalar = np.einsum("...ij,...kl,...ijkl->...", m.g_inv, m.g_inv, lowered)
    return LCCurvature(lc, lowered, Form11(ricci), scalar)


def curvature_bundle(spec, p, mode: str = "analytic", step=None) -> CurvatureBundle:
    m = evaluate_metric(spec, p, mode, step)
    full = chern_curvature(m)
    ric = Form11(np.einsum("...kl,...ijkl->...ij", m.g_inv, full))
    lc = lc_curvature(m)
    return CurvatureBundle(full, ric, trace_form(ric, m), lc.lc_11, lc.lc_lowered, lc.lc_ricci,
                           lc.lc_scalar)


def line_bundle_ricci(weight, p, step=None, domain=None) -> Form11:
    """Curvature of the dual of a line bundle with local weight h.

    The curvature of h^{-1} is -sqrt(-1) d dbar log h^{-1} = sqrt(-1) d dbar log h,
    so the stored coefficients are d_i d_jbar log h.  Uses one Richardson
    extrapolation on top of the central second differences.
    """
    expr = fielddsl.parse(weight)
    z = as_coords(p)

    def log_weight(q):
        h = np.asarray(fielddsl.evaluate(expr, q))
        if np.any(h <= 0):
            raise WeightError(f"weight {expr.text} is not positive")
        return np.log(h)

    log_weight(z)
    if step is None:
        step = 1e-3 * np.maximum(1.0, np.linalg.norm(z, axis=-1))
    mixed, _ = wirtinger_hessians(log_weight, z, step, domain, order=4)
    return Form11(mixed)
