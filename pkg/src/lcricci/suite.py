"""Named verification suites over metrics, sample points and derivative modes.

A suite is a list of checks.  Every (check, metric) pair yields one record:
``ok`` when the check applies and ran, ``not-applicable`` when the metric is
outside the check's scope, ``error`` when a numerical error stopped it.
Records carry max and mean residual over the sampled points, so reports are
deterministic for a fixed configuration (the timestamp is the only field
that varies between runs).
"""

from __future__ import annotations

import json
import math
import zlib
from dataclasses import dataclass, field
from datetime import datetime, timezone
from math import factorial
from typing import Callable, Optional

import numpy as np

from . import __version__
from .connection import lc_coefficients
from .curvature import chern_ricci, chern_scalar, lc_curvature, line_bundle_ricci
from .fielddsl import seeded_factors
from .hodge import (
    balanced_residual,
    d_d_star_omega,
    d_star_omega_lambda,
    dbar_dbar_star_omega,
    dbar_star_omega_gamma,
    dbar_star_omega_lambda,
    gauduchon_residual,
    metric_form,
    pointwise_inner_11,
    torsion_form,
)
from .linalg import wirtinger_gradients, wirtinger_hessians
from . import fielddsl, quadrature
from .metrics import (
    Conformal,
    HopfPerturbed,
    HopfStandard,
    InoueModel,
    evaluate_metric,
    parse_metric,
)

SUITES = (
    "key-identity",
    "scalar-identity",
    "adjoint-agreement",
    "conformal-lemma",
    "kahler-degeneracy",
    "hopf-closed-forms",
    "gauduchon-balanced",
    "integral-identities",
    "inoue-curvature",
)
MODES = ("analytic", "fd")
SCHEMA = "lcricci.verification-report/1"
DEFAULT_STEP_NOTE = ("default: 1e-4*max(1,|p|) for metric jets, "
                     "1e-3*max(1,|p|) for derived fields")

CONVENTIONS = {
    "metric": "g[i][j] = g_{i jbar}; omega = sqrt(-1) g_{i jbar} dz^i ^ dzbar^j",
    "form11": "coefficients A_{i jbar} of sqrt(-1) A_{i jbar} dz^i ^ dzbar^j (sqrt(-1) implicit)",
    "lc_lowering": "frak r_{i jbar k lbar} = frak r^s_{i jbar k} g_{s lbar}",
    "inner_11": "<a,b> = a_{i jbar} conj(b_{k lbar}) g^{i kbar} g^{l jbar}",
    "d_d_star": "d d^* omega = conjugate transpose of dbar dbar^* omega",
    "volume": quadrature.VOLUME_CONVENTION,
    "norm": quadrature.NORM_CONVENTION,
    "summation": quadrature.SUMMATION,
}


class SuiteError(ValueError):
    pass


# --------------------------------------------------------------------------
# Metric sets and sampling


def _conformal_set(bases, seed=0):
    out = []
    for base, f in zip(bases, seeded_factors(len(bases), 2, seed)):
        out.append(f"conformal({base}; f={f.text})")
    return out


SWEEP = [
    "flat:n=2",
    "conformal(flat:n=2; f=x1)",
    "hopf0:n=2",
    "hopfp:n=2",
    "hopfp:n=3",
    "fs:n=2",
] + _conformal_set(["hopf0:n=2", "hopfp:n=2", "fs:n=2", "flat:n=2", "hopfp:n=2"])

METRIC_SETS = {
    "sweep": SWEEP,
    "default": SWEEP + ["inoue-k"],
    "lemma": _conformal_set(["flat:n=2"] * 5) + _conformal_set(["hopf0:n=2"] * 5),
    "hopf": ["hopf0:n=2", "hopfp:n=2", "hopfp:n=3"],
    "kahler": ["flat:n=2", "fs:n=1", "fs:n=2"],
}


def _base(spec):
    while isinstance(spec, Conformal):
        spec = spec.base
    return spec


def sampling_region(spec) -> str:
    base = _base(spec)
    if isinstance(base, (HopfStandard, HopfPerturbed)):
        return "annulus 0.6 <= |z| <= 1.4"
    if isinstance(base, InoueModel):
        return "strip |Re w| <= 1, 0.5 <= Im w <= 2, |z2| <= 1"
    return "unit polydisc"


def sample_points(spec, count: int, seed: int) -> np.ndarray:
    """Seeded uniform samples from the metric's sampling region.

    The generator is keyed by (seed, spec string) so a metric's points do
    not depend on which other metrics share the run.
    """
    spec = parse_metric(spec)
    rng = np.random.default_rng([seed, zlib.crc32(spec.to_string().encode())])
    n = spec.n
    base = _base(spec)
    if isinstance(base, (HopfStandard, HopfPerturbed)):
        d = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        lo, hi = 0.6 ** (2 * n), 1.4 ** (2 * n)
        r = (lo + rng.uniform(size=(count, 1)) * (hi - lo)) ** (1 / (2 * n))
        return d * r
    if isinstance(base, InoueModel):
        w = rng.uniform(-1, 1, count) + 1j * rng.uniform(0.5, 2.0, count)
        z2 = np.sqrt(rng.uniform(size=count)) * np.exp(2j * np.pi * rng.uniform(size=count))
        return np.stack([w, z2], axis=1)
    radius = np.sqrt(rng.uniform(size=(count, n)))
    return radius * np.exp(2j * np.pi * rng.uniform(size=(count, n)))


# --------------------------------------------------------------------------
# Checks


@dataclass
class Context:
    """Per-(metric, config) cache shared by the checks of one run."""

    spec: object
    z: np.ndarray
    mode: str
    step: Optional[float]
    seed: int
    resolution: Optional[int]
    _cache: dict = field(default_factory=dict)

    def get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def m(self):
        return self.get("m", lambda: evaluate_metric(self.spec, self.z, self.mode, self.step))

    @property
    def lc(self):
        return self.get("lc", lambda: lc_curvature(self.m))

    @property
    def ricci(self):
        return self.get("ricci", lambda: chern_ricci(self.m, "trace"))

    @property
    def bbar(self):
        return self.get("bbar", lambda: dbar_dbar_star_omega(self.m))

    @property
    def inner_dd(self):
        return self.get("inner_dd", lambda: pointwise_inner_11(d_d_star_omega(self.m),
                                                               metric_form(self.m), self.m))

    @property
    def inner_bb(self):
        return self.get("inner_bb", lambda: pointwise_inner_11(self.bbar, metric_form(self.m),
                                                               self.m))


def _per_point(a):
    """Max-abs over all tensor axes, keeping the leading point axis."""
    a = np.abs(np.asarray(a))
    return a.reshape(a.shape[0], -1).max(axis=1) if a.ndim > 1 else a


@dataclass(frozen=True)
class Check:
    check_id: str
    suite: str
    anchor: str
    tol_analytic: float
    tol_fd: float
    applies: Callable[[object], Optional[str]]  # None if applicable, else a reason
    run: Callable[[Context], tuple]  # -> (residuals, points_evaluated, note)

    def tolerance(self, mode: str) -> float:
        return self.tol_analytic if mode == "analytic" else self.tol_fd


def _always(spec):
    return None


def _needs_conformal(spec):
    return None if isinstance(spec, Conformal) else "metric is not a conformal rescaling"


def _needs_kahler(spec):
    return None if spec.is_kahler else "metric is not Kahler"


def _needs_hopfp(spec):
    return None if isinstance(spec, HopfPerturbed) else "closed form is for hopf-perturbed"


def _needs_hopf(spec):
    if isinstance(spec, (HopfStandard, HopfPerturbed)):
        return None
    return "closed form is for hopf-standard and hopf-perturbed"


def _needs_hopf0(spec):
    return None if isinstance(spec, HopfStandard) else "regression value is for hopf-standard"


def _needs_n2(spec):
    return None if spec.n >= 2 else "needs n >= 2"


def _known_gauduchon(spec):
    if spec.n < 2:
        return "needs n >= 2"
    if spec.is_kahler or isinstance(spec, (HopfStandard, HopfPerturbed)):
        return None
    return "metric is not known to be Gauduchon"


def _needs_inoue(spec):
    return None if isinstance(spec, InoueModel) else "metric is not the Inoue model"


def _pts(ctx, res, note=""):
    return res, ctx.z.shape[0], note


# key identity ------------------------------------------------------------


def _key_lc_ricci(ctx):
    via = ctx.ricci - _second_order(ctx)
    return _pts(ctx, _per_point(ctx.lc.lc_ricci.coeff - via.coeff))


def _second_order(ctx):
    from .curvature import Form11

    b = ctx.bbar.coeff
    return Form11(0.5 * (b + np.conj(np.swapaxes(b, -1, -2))))


def _chern_routes(ctx):
    return _pts(ctx, _per_point(ctx.ricci.coeff - chern_ricci(ctx.m, "logdet").coeff))


# scalar identity ---------------------------------------------------------


def _key2(ctx):
    res = ctx.lc.lc_scalar - chern_scalar(ctx.m, ctx.ricci) + np.real(ctx.inner_dd)
    return _pts(ctx, np.abs(np.real(res)))


def _inner_symmetry(ctx):
    return _pts(ctx, np.abs(ctx.inner_dd - ctx.inner_bb))


def _inner_imag(ctx):
    return _pts(ctx, np.maximum(np.abs(np.imag(ctx.inner_dd)), np.abs(np.imag(ctx.inner_bb))))


def _scalar_reality(ctx):
    s_c = chern_scalar(ctx.m, ctx.ricci)
    return _pts(ctx, np.maximum(np.abs(np.imag(s_c)), np.abs(np.imag(ctx.lc.lc_scalar))))


# adjoint routes ----------------------------------------------------------


def _adjoint_routes(ctx):
    lam = dbar_star_omega_lambda(ctx.m).coeff
    gam = dbar_star_omega_gamma(lc_coefficients(ctx.m)).coeff
    return _pts(ctx, _per_point(lam - gam))


def _adjoint_conjugation(ctx):
    lam = dbar_star_omega_lambda(ctx.m).coeff
    return _pts(ctx, _per_point(d_star_omega_lambda(ctx.m).coeff - np.conj(lam)))


# conformal lemma ---------------------------------------------------------


def _factor_derivs(ctx):
    spec = ctx.spec

    def fn(p):
        return fielddsl.evaluate(spec.factor, p)

    def compute():
        h = 1e-3 * np.maximum(1.0, np.linalg.norm(ctx.z, axis=-1))
        fk, _ = wirtinger_gradients(fn, ctx.z, h, spec.in_domain, order=4)
        fkl, _ = wirtinger_hessians(fn, ctx.z, h, spec.in_domain, order=4)
        return fk, fkl

    return ctx.get("factor_derivs", compute)


def _lemma_dbar_star(ctx):
    n = ctx.spec.n
    fk, _ = _factor_derivs(ctx)
    lhs = dbar_star_omega_lambda(ctx.m).coeff
    base = evaluate_metric(ctx.spec.base, ctx.z, ctx.mode, ctx.step, second=False)
    rhs = dbar_star_omega_lambda(base).coeff + 1j * (n - 1) * fk
    return _pts(ctx, _per_point(lhs - rhs))


def _lemma_ddbar(ctx):
    n = ctx.spec.n
    _, fkl = _factor_derivs(ctx)
    base = evaluate_metric(ctx.spec.base, ctx.z, ctx.mode, ctx.step, second=False)
    rhs = dbar_dbar_star_omega(base).coeff - (n - 1) * fkl
    return _pts(ctx, _per_point(ctx.bbar.coeff - rhs))


# Kahler degeneracy --------------------------------------------------------


def _kahler_gamma(ctx):
    return _pts(ctx, _per_point(lc_coefficients(ctx.m).gamma_mixed))


def _kahler_lc_chern(ctx):
    return _pts(ctx, _per_point(ctx.lc.lc_ricci.coeff - ctx.ricci.coeff))


def _kahler_torsion(ctx):
    return _pts(ctx, _per_point(torsion_form(ctx.m).coeff))


# Hopf closed forms --------------------------------------------------------


def _hopf_data(ctx):
    z = ctx.z
    r2 = np.sum(np.abs(z) ** 2, axis=-1)
    return z, r2


def _hopf_lc_flat(ctx):
    return _pts(ctx, _per_point(ctx.lc.lc_ricci.coeff))


def _hopf_dbar_star(ctx):
    z, r2 = _hopf_data(ctx)
    n = ctx.spec.n
    c = n if isinstance(ctx.spec, HopfPerturbed) else n - 1
    expected = -c * 1j * np.conj(z) / r2[:, None]
    lam = dbar_star_omega_lambda(ctx.m).coeff
    gam = dbar_star_omega_gamma(lc_coefficients(ctx.m)).coeff
    return _pts(ctx, np.maximum(_per_point(lam - expected), _per_point(gam - expected)))


def _hopf_chern_ricci(ctx):
    z, r2 = _hopf_data(ctx)
    n = ctx.spec.n
    ddbar_log = (np.eye(n) / r2[:, None, None]
                 - np.conj(z)[:, :, None] * z[:, None, :] / r2[:, None, None] ** 2)
    return _pts(ctx, _per_point(ctx.ricci.coeff - n * ddbar_log))


def _hopf_det(ctx):
    z, r2 = _hopf_data(ctx)
    n = ctx.spec.n
    const = ((n - 1) / n) ** (n - 1) if isinstance(ctx.spec, HopfPerturbed) else 1.0
    return _pts(ctx, np.abs(ctx.m.det * r2**n - const) / const)


def _hopf_inverse(ctx):
    spec = ctx.spec
    ref = spec.closed_form_inverse(ctx.z)
    scale = _per_point(ref)
    return _pts(ctx, _per_point(ctx.m.g_inv - ref) / scale)


def _hopf_proof_identities(ctx):
    z, r2 = _hopf_data(ctx)
    n = ctx.spec.n
    gi = ctx.m.g_inv
    first = np.einsum("...ki,...k->...i", gi, np.conj(z)) - r2[:, None] * np.conj(z)
    trace = np.einsum("...qq->...", gi) - (n + 1) * r2
    res = np.maximum(_per_point(first) / r2 ** 1.5, np.abs(trace) / r2)
    return _pts(ctx, res)


def _hopf_deck_metric(ctx):
    g = ctx.spec.field(ctx.z)
    g2 = ctx.spec.field(ctx.z / 2)
    return _pts(ctx, _per_point(g2 - 4 * g) / _per_point(4 * g))


def _hopf_deck_scalars(ctx):
    half = evaluate_metric(ctx.spec, ctx.z / 2, ctx.mode, ctx.step)
    lc_half = lc_curvature(half)
    d_c = np.abs(chern_scalar(half) - chern_scalar(ctx.m, ctx.ricci))
    d_lc = np.abs(lc_half.lc_scalar - ctx.lc.lc_scalar)
    return _pts(ctx, np.maximum(d_c, d_lc))


# Gauduchon and balanced ---------------------------------------------------


def _gauduchon(ctx):
    return _pts(ctx, _per_point(gauduchon_residual(ctx.spec, ctx.z, ctx.mode, ctx.step)))


def _gauduchon_routes(ctx):
    a = gauduchon_residual(ctx.spec, ctx.z, "analytic", ctx.step)
    b = gauduchon_residual(ctx.spec, ctx.z, "fd", ctx.step)
    return _pts(ctx, _per_point(a - b))


def _balanced_kahler(ctx):
    return _pts(ctx, _per_point(balanced_residual(ctx.spec, ctx.z, ctx.mode, ctx.step)))


def _balanced_hopf0(ctx):
    z, r2 = _hopf_data(ctx)
    n = ctx.spec.n
    observed = _per_point(balanced_residual(ctx.spec, ctx.z, ctx.mode, ctx.step))
    expected = factorial(n - 1) * (n - 1) * np.max(np.abs(z), axis=-1) / r2**n
    note = f"min residual magnitude {float(np.min(observed)):.6g} (bounded away from 0)"
    return _pts(ctx, np.abs(observed - expected) / expected, note)


# integral identities -------------------------------------------------------


def _resolution(ctx):
    return ctx.resolution if ctx.resolution is not None else 8


def _integral_total_scalar(ctx):
    out = quadrature.total_scalar_check(ctx.spec, _resolution(ctx), ctx.mode, ctx.step)
    nodes = quadrature.IntegrationGrid(ctx.spec.n, _resolution(ctx)).size()
    return (np.array([out["relative_residual"]]), nodes,
            f"int s omega^n = {out['lhs']:.12g}, n int Ric^omega^(n-1) = {out['rhs']:.12g}")


def _lcflat_applies(spec):
    if not isinstance(spec, HopfPerturbed):
        return "identity is checked on hopf-perturbed with f = 0"
    if spec.n != 2:
        return ("norm convention omega^n/n! makes the identity exact only at n = 2; "
                "lcflat_check reports the raw ratio (n-1)! for n > 2")
    return None


def _integral_lcflat(ctx):
    out = quadrature.lcflat_check(ctx.spec, _resolution(ctx), ctx.mode, ctx.step)
    nodes = quadrature.IntegrationGrid(ctx.spec.n, _resolution(ctx)).size()
    note = (f"ratio {out['ratio']:.12g}; gauduchon max residual "
            f"{out['gauduchon_max_residual']:.3g}")
    if not out["precondition"]:
        return np.array([np.inf]), nodes, "Gauduchon precondition failed; " + note
    return np.array([out["relative_residual"]]), nodes, note


def _integral_deck(ctx):
    out = quadrature.deck_invariance(ctx.spec, "scalar", _resolution(ctx), ctx.mode, ctx.step)
    nodes = 2 * quadrature.IntegrationGrid(ctx.spec.n, _resolution(ctx)).size()
    return np.array([out["relative_difference"]]), nodes, ""


def _integral_refinement(ctx):
    base = max(2, _resolution(ctx) // (2 if ctx.spec.n <= 2 else 4))
    study = quadrature.grid_refine_study(ctx.spec, "scalar", base, ctx.mode, ctx.step)
    nodes = sum(quadrature.IntegrationGrid(ctx.spec.n, r).size() for r in study.resolutions)
    res = study.differences[-1] if study.certified else np.inf
    note = "relative differences " + ", ".join(f"{d:.3g}" for d in study.differences)
    return np.array([res]), nodes, note


def _integral_calibration(ctx):
    grid = quadrature.IntegrationGrid(ctx.spec.n, _resolution(ctx))
    exact = grid.exact_volume()
    return np.array([abs(grid.total_weight() - exact) / exact]), grid.size(), ""


# Inoue ------------------------------------------------------------------------

INOUE_WEIGHT = "y1^2"


def _inoue_at_i(ctx):
    out = line_bundle_ricci(INOUE_WEIGHT, [1j, 0])
    expected = np.zeros((2, 2))
    expected[0, 0] = -0.5
    return np.array([float(np.max(np.abs(out.coeff - expected)))]), 1, ""


def _inoue_profile(ctx):
    w = ctx.z[:, 0]
    out = line_bundle_ricci(INOUE_WEIGHT, ctx.z).coeff
    expected = np.zeros(out.shape)
    expected[:, 0, 0] = -1 / (2 * np.imag(w) ** 2)
    return _pts(ctx, _per_point(out - expected))


def _inoue_chern(ctx):
    out = line_bundle_ricci(INOUE_WEIGHT, ctx.z).coeff
    return _pts(ctx, _per_point(ctx.ricci.coeff - out))


CHECKS = (
    Check("key.lc_ricci", "key-identity",
          "Ricci curvature relation: LC Ricci = Ric - (d d^* omega + dbar dbar^* omega)/2",
          1e-5, 1e-3, _always, _key_lc_ricci),
    Check("key.chern_ricci_routes", "key-identity",
          "Chern-Ricci form as g-trace and as -d dbar log det g", 1e-6, 1e-6, _always,
          _chern_routes),
    Check("key2.scalar_relation", "scalar-identity",
          "scalar curvature relation: s_LC = s_C - <d d^* omega, omega>", 1e-5, 1e-5, _always,
          _key2),
    Check("key2.inner_symmetry", "scalar-identity",
          "<d d^* omega, omega> = <dbar dbar^* omega, omega>", 1e-5, 1e-5, _always,
          _inner_symmetry),
    Check("key2.inner_imag", "scalar-identity", "reality of <d d^* omega, omega>", 1e-8, 1e-6,
          _always, _inner_imag),
    Check("scalar.reality", "scalar-identity", "reality of s_C and s_LC", 1e-8, 1e-6, _always,
          _scalar_reality),
    Check("key11.routes", "adjoint-agreement",
          "dbar^* omega: sqrt(-1) Lambda d omega vs 2 sqrt(-1) conj(Gamma^k_{ibar k})",
          1e-6, 1e-6, _always, _adjoint_routes),
    Check("key11.conjugation", "adjoint-agreement", "d^* omega = conj(dbar^* omega)", 1e-6, 1e-6,
          _always, _adjoint_conjugation),
    Check("lemma.dbar_star", "conformal-lemma",
          "conformal change: dbar^*_f omega_f = dbar^* omega + sqrt(-1)(n-1) d f", 1e-5, 1e-5,
          _needs_conformal, _lemma_dbar_star),
    Check("lemma.ddbar_dbar_star", "conformal-lemma",
          "conformal change: dbar dbar^*_f omega_f = dbar dbar^* omega - sqrt(-1)(n-1) d dbar f",
          1e-4, 1e-4, _needs_conformal, _lemma_ddbar),
    Check("kahler.gamma_mixed", "kahler-degeneracy", "Kahler metrics: Gamma^k_{ibar j} = 0",
          1e-8, 1e-6, _needs_kahler, _kahler_gamma),
    Check("kahler.lc_equals_chern", "kahler-degeneracy", "Kahler metrics: LC Ricci = Ric",
          1e-6, 1e-6, _needs_kahler, _kahler_lc_chern),
    Check("kahler.torsion", "kahler-degeneracy", "Kahler metrics: d omega = 0", 1e-8, 1e-6,
          _needs_kahler, _kahler_torsion),
    Check("hopf.lc_ricci_flat", "hopf-closed-forms",
          "perturbed Hopf metric is Levi-Civita Ricci-flat", 1e-6, 1e-4, _needs_hopfp,
          _hopf_lc_flat),
    Check("hopf.dbar_star_closed_form", "hopf-closed-forms",
          "Hopf metrics: dbar^* omega = -c sqrt(-1) d log|z|^2 (c = n perturbed, n-1 standard)",
          1e-6, 1e-6, _needs_hopf, _hopf_dbar_star),
    Check("hopf.chern_ricci_closed_form", "hopf-closed-forms",
          "Hopf metrics: Ric = n sqrt(-1) d dbar log|z|^2", 1e-6, 1e-6, _needs_hopf,
          _hopf_chern_ricci),
    Check("hopf.det_constant", "hopf-closed-forms",
          "Hopf metrics: det g |z|^{2n} constant (((n-1)/n)^{n-1} perturbed, 1 standard)",
          1e-10, 1e-10, _needs_hopf, _hopf_det),
    Check("hopf.inverse_closed_form", "hopf-closed-forms", "perturbed Hopf metric: closed-form inverse",
          1e-10, 1e-10, _needs_hopfp, _hopf_inverse),
    Check("hopf.proof_identities", "hopf-closed-forms",
          "perturbed Hopf metric: g^{k ibar} zbar^k = |z|^2 zbar^i and g^{q qbar} = (n+1)|z|^2",
          1e-10, 1e-10, _needs_hopfp, _hopf_proof_identities),
    Check("hopf.deck_metric", "hopf-closed-forms", "Hopf metrics: g(z/2) = 4 g(z)", 1e-12, 1e-12,
          _needs_hopf, _hopf_deck_metric),
    Check("hopf.deck_scalars", "hopf-closed-forms",
          "Hopf metrics: s_C and s_LC invariant under z -> z/2", 1e-6, 1e-4, _needs_hopf,
          _hopf_deck_scalars),
    Check("gauduchon.residual", "gauduchon-balanced", "Gauduchon condition d dbar omega^{n-1} = 0",
          1e-6, 1e-6, _known_gauduchon, _gauduchon),
    Check("gauduchon.route_agreement", "gauduchon-balanced",
          "d dbar omega^{n-1}: jet propagation vs stencil on wedge-power coefficients",
          1e-5, 1e-5, _needs_n2, _gauduchon_routes),
    Check("balanced.kahler", "gauduchon-balanced", "Kahler metrics are balanced: d omega^{n-1} = 0",
          1e-8, 1e-6, _needs_kahler, _balanced_kahler),
    Check("balanced.hopf_standard", "gauduchon-balanced",
          "standard Hopf metric is not balanced: max|d omega^{n-1}| = (n-1)!(n-1) max|z_k|/|z|^{2n}",
          1e-6, 1e-5, _needs_hopf0, _balanced_hopf0),
    Check("integral.total_scalar", "integral-identities",
          "total scalar curvature: int s omega^n = n int Ric ^ omega^{n-1}", 1e-3, 1e-3,
          _needs_hopf, _integral_total_scalar),
    Check("integral.lcflat", "integral-identities",
          "total Chern scalar curvature of a LC Ricci-flat Gauduchon metric = n ||dbar^* omega||^2",
          1e-3, 1e-3, _lcflat_applies, _integral_lcflat),
    Check("integral.deck_invariance", "integral-identities",
          "fundamental-domain independence under z -> z/2", 1e-3, 1e-3, _needs_hopf,
          _integral_deck),
    Check("integral.refinement", "integral-identities",
          "quadrature convergence certified over R, 2R, 4R", 1e-2, 1e-2, _needs_hopf,
          _integral_refinement),
    Check("integral.calibration", "integral-identities",
          "grid weights reproduce the Euclidean shell volume", 1e-6, 1e-6, _needs_hopf,
          _integral_calibration),
    Check("inoue.weight_at_i", "inoue-curvature",
          "Inoue canonical weight (Im w)^2: curvature -1/2 dw ^ dwbar at w = i", 1e-8, 1e-8,
          _needs_inoue, _inoue_at_i),
    Check("inoue.weight_profile", "inoue-curvature",
          "Inoue canonical weight: curvature profile -1/(2 (Im w)^2)", 1e-8, 1e-8, _needs_inoue,
          _inoue_profile),
    Check("inoue.chern_ricci_matches_weight", "inoue-curvature",
          "Inoue chart metric: Chern-Ricci equals the canonical-weight curvature", 1e-6, 1e-6,
          _needs_inoue, _inoue_chern),
)

CHECKS_BY_ID = {c.check_id: c for c in CHECKS}


def checks_for(suite: str):
    if suite == "all":
        return list(CHECKS)
    if suite in SUITES:
        return [c for c in CHECKS if c.suite == suite]
    if suite in CHECKS_BY_ID:
        return [CHECKS_BY_ID[suite]]
    raise SuiteError(f"unknown suite or check {suite!r}")


# --------------------------------------------------------------------------
# Running


@dataclass(frozen=True)
class SuiteConfig:
    suite: str
    metrics: tuple
    points: int = 20
    seed: int = 0
    tolerance: Optional[float] = None  # overrides every check's tolerance when set
    mode: str = "analytic"
    step: Optional[float] = None
    resolution: Optional[int] = None

    def __post_init__(self):
        if self.tolerance is not None and not self.tolerance > 0:
            raise SuiteError("tolerance must be positive")
        if self.points < 1:
            raise SuiteError("point count must be at least 1")
        if self.mode not in MODES:
            raise SuiteError(f"derivative mode must be one of {MODES}")
        if self.step is not None and not self.step > 0:
            raise SuiteError("step must be positive")
        if self.resolution is not None and self.resolution < 1:
            raise SuiteError("resolution must be at least 1")
        if not self.metrics:
            raise SuiteError("no metrics given")


def resolve_metrics(metrics=None, metric_set=None) -> list:
    out = list(metrics or [])
    if metric_set is not None:
        if metric_set not in METRIC_SETS:
            raise SuiteError(f"unknown metric set {metric_set!r}; choose from "
                             + ", ".join(METRIC_SETS))
        out += METRIC_SETS[metric_set]
    return out


def _finite(x: float):
    return x if math.isfinite(x) else None


def _record(check, metric_text, tol, status, residuals=None, points=0, note=""):
    rec = {
        "check_id": check.check_id,
        "suite": check.suite,
        "metric": metric_text,
        "points_evaluated": int(points),
        "max_residual": None,
        "mean_residual": None,
        "tolerance": tol,
        "pass": None,
        "status": status,
        "anchor": check.anchor,
        "note": note,
    }
    if residuals is not None:
        r = np.asarray(residuals, dtype=float).ravel()
        mx = float(np.max(r)) if r.size else 0.0
        rec["max_residual"] = _finite(mx)
        rec["mean_residual"] = _finite(float(np.mean(r))) if r.size else 0.0
        rec["pass"] = bool(math.isfinite(mx) and mx <= tol)
    elif status == "error":
        rec["pass"] = False
    return rec


NUMERICAL_ERRORS = (ValueError, ArithmeticError, IndexError, np.linalg.LinAlgError)


def run_suite(config: SuiteConfig, timestamp: bool = True) -> dict:
    """Run the configured checks and assemble a report dictionary."""
    checks = checks_for(config.suite)
    specs = []
    for text in config.metrics:
        specs.append(parse_metric(text))
    records = []
    applicable = 0
    for spec in specs:
        metric_text = spec.to_string()
        try:
            z = sample_points(spec, config.points, config.seed)
        except NUMERICAL_ERRORS as exc:
            z, sample_error = None, str(exc)
        ctx = Context(spec, z, config.mode, config.step, config.seed, config.resolution)
        for check in checks:
            tol = config.tolerance if config.tolerance is not None else check.tolerance(config.mode)
            reason = check.applies(spec)
            if reason is not None:
                records.append(_record(check, metric_text, tol, "not-applicable", note=reason))
                continue
            applicable += 1
            if z is None:
                records.append(_record(check, metric_text, tol, "error", note=sample_error))
                continue
            try:
                res, points, note = check.run(ctx)
            except NUMERICAL_ERRORS as exc:
                records.append(_record(check, metric_text, tol, "error",
                                       note=f"{type(exc).__name__}: {exc}"))
                continue
            records.append(_record(check, metric_text, tol, "ok", res, points, note))
    if applicable == 0:
        raise SuiteError(f"no check of suite {config.suite!r} applies to the given metrics")
    passes = [r["pass"] for r in records if r["status"] != "not-applicable"]
    env = {
        "version": __version__,
        "mode": config.mode,
        "step": config.step if config.step is not None else DEFAULT_STEP_NOTE,
        "seed": config.seed,
        "points": config.points,
        "resolution": config.resolution,
        "sampling": {spec.to_string(): sampling_region(spec) for spec in specs},
        "conventions": CONVENTIONS,
    }
    if timestamp:
        env["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    coverage = {c.check_id: c.anchor for c in checks}
    return {
        "schema": SCHEMA,
        "suite": config.suite,
        "environment": env,
        "checks": records,
        "coverage": coverage,
        "summary": {
            "applicable": applicable,
            "passed": sum(1 for p in passes if p),
            "failed": sum(1 for p in passes if not p),
            "not_applicable": len(records) - applicable,
        },
        "overall_pass": bool(all(passes)),
    }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2)


def strip_timestamp(report: dict) -> dict:
    out = json.loads(json.dumps(report))
    out["environment"].pop("timestamp", None)
    return out


def render_table(report: dict) -> str:
    """Human-readable rendering of a report dictionary."""
    rows = [("check", "metric", "status", "max residual", "tol", "result")]
    for r in report["checks"]:
        mx = r["max_residual"]
        mx_text = "-" if r["status"] != "ok" else ("inf" if mx is None else f"{mx:.3e}")
        result = {True: "PASS", False: "FAIL", None: "n/a"}[r["pass"]]
        rows.append((r["check_id"], r["metric"], r["status"], mx_text, f"{r['tolerance']:.0e}",
                     result))
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    widths[1] = min(widths[1], 48)

    def fmt(row):
        cells = [row[i][: widths[i]].ljust(widths[i]) for i in range(len(row))]
        return "  ".join(cells).rstrip()

    lines = [fmt(rows[0]), fmt(tuple("-" * w for w in widths))]
    lines += [fmt(row) for row in rows[1:]]
    s = report["summary"]
    lines.append("")
    lines.append(f"suite {report['suite']}: {s['passed']} passed, {s['failed']} failed, "
                 f"{s['not_applicable']} not applicable; overall "
                 f"{'PASS' if report['overall_pass'] else 'FAIL'}")
    return "\n".join(lines)
