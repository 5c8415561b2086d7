"""Built-in and derived Hermitian metric fields on local charts.

A :class:`MetricSpec` is an immutable description of a metric field.  Its
``field(z)`` method evaluates the matrix ``g[..., i, j]`` on a batch of chart
points; zoo members also publish closed-form jets via ``analytic_jet``.
:func:`evaluate_metric` bundles value, inverse, determinant and jet into a
:class:`MetricValue`.

Spec strings (used by the CLI)::

    flat:n=2   hopf0:n=3   hopfp:n=2   fs:n=2   inoue-k
    conformal(hopfp:n=2; f=sin(x1))
    custom(n=2; g11=1+absq; g22=1; g12=(x1, y2))
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import fielddsl
from .fielddsl import FieldExpr
from .linalg import (
    DerivativeJet,
    as_coords,
    cholesky_or_raise,
    fd_jet,
    invert_hermitian,
    wirtinger_gradients,
    wirtinger_hessians,
)


class DomainError(ValueError):
    """Point outside the chart domain of a metric."""


class MetricSpecError(ValueError):
    """Malformed metric spec string or parameters."""


class AnalyticJetUnavailable(ValueError):
    pass


def _eye(z, n):
    return np.broadcast_to(np.eye(n, dtype=complex), z.shape[:-1] + (n, n))


def _outer_conj(z):
    # M[i, j] = conj(z_i) z_j
    return np.conj(z)[..., :, None] * z[..., None, :]


def _absq(z):
    return np.sum(np.abs(z) ** 2, axis=-1)


@dataclass(frozen=True)
class MetricSpec:
    n: int

    kind = "abstract"
    domain = "full space"
    is_kahler = False

    def in_domain(self, z) -> np.ndarray:
        z = as_coords(z)
        return np.all(np.isfinite(z), axis=-1)

    def check_domain(self, z):
        z = as_coords(z)
        if z.shape[-1] != self.n:
            raise DomainError(f"{self} expects {self.n} coordinates, got {z.shape[-1]}")
        if not np.all(self.in_domain(z)):
            raise DomainError(f"point outside the domain ({self.domain}) of {self}")

    def field(self, z) -> np.ndarray:
        raise NotImplementedError

    def analytic_jet(self, z) -> tuple:
        """(g, d_hol, d_anti, d_mixed) in closed form."""
        raise AnalyticJetUnavailable(f"{self} has no closed-form derivatives")

    @property
    def family(self) -> str:
        return self.kind

    def __str__(self):
        return self.to_string()

    def to_string(self) -> str:
        return f"{self.kind}:n={self.n}"


@dataclass(frozen=True)
class Flat(MetricSpec):
    kind = "flat"
    is_kahler = True

    def field(self, z):
        z = as_coords(z)
        return _eye(z, self.n).copy()

    def analytic_jet(self, z):
        z = as_coords(z)
        n = self.n
        zero = np.zeros(z.shape[:-1] + (n, n, n), dtype=complex)
        return self.field(z), zero, zero.copy(), np.zeros(z.shape[:-1] + (n,) * 4, dtype=complex)


@dataclass(frozen=True)
class HopfStandard(MetricSpec):
    """g_{i jbar} = delta_ij / |z|^2 on C^n minus the origin."""

    kind = "hopf0"
    domain = "punctured"

    def in_domain(self, z):
        return _absq(as_coords(z)) > 0

    def field(self, z):
        z = as_coords(z)
        return _eye(z, self.n) / _absq(z)[..., None, None]

    def analytic_jet(self, z):
        z = as_coords(z)
        n = self.n
        rho = _absq(z)[..., None, None, None]
        eye = np.eye(n)
        g = self.field(z)
        d_hol = -np.conj(z)[..., :, None, None] * eye / rho**2
        d_anti = -z[..., :, None, None] * eye / rho**2
        kl = (-np.eye(n) / rho[..., 0] ** 2 + 2 * _outer_conj(z) / rho[..., 0] ** 3)
        d_mixed = kl[..., :, :, None, None] * eye
        return g, d_hol, d_anti, d_mixed


@dataclass(frozen=True)
class HopfPerturbed(MetricSpec):
    """omega_0 minus (1/n) i d dbar log|z|^2, i.e.

    g_{i jbar} = ((n-1)/n delta_ij + conj(z_i) z_j / (n |z|^2)) / |z|^2.
    """

    kind = "hopfp"
    domain = "punctured"

    def __post_init__(self):
        if self.n < 2:
            raise MetricSpecError("hopf-perturbed metric requires n >= 2")

    def in_domain(self, z):
        return _absq(as_coords(z)) > 0

    def field(self, z):
        z = as_coords(z)
        n = self.n
        rho = _absq(z)[..., None, None]
        return ((n - 1) / n * _eye(z, n) + _outer_conj(z) / (n * rho)) / rho

    def closed_form_inverse(self, z):
        z = as_coords(z)
        n = self.n
        rho = _absq(z)[..., None, None]
        # g^{i jbar} = |z|^2 (n/(n-1) delta_ij - z_i conj(z_j) / ((n-1)|z|^2))
        zzb = z[..., :, None] * np.conj(z)[..., None, :]
        return rho * (n / (n - 1) * _eye(z, n) - zzb / ((n - 1) * rho))

    def closed_form_det(self, z):
        z = as_coords(z)
        n = self.n
        return ((n - 1) / n) ** (n - 1) * _absq(z) ** (-n)

    def analytic_jet(self, z):
        z = as_coords(z)
        n = self.n
        a, b = (n - 1) / n, 1 / n
        eye = np.eye(n)
        zb = np.conj(z)
        r = _absq(z)
        r1 = r[..., None, None, None]
        # first derivatives of delta/rho
        dh0 = -zb[..., :, None, None] * eye / r1**2
        da0 = -z[..., :, None, None] * eye / r1**2
        # first derivatives of P = conj(z_i) z_j / rho^2; index order [k, i, j]
        P = _outer_conj(z)
        dhP = (zb[..., None, :, None] * eye[:, None, :]) / r1**2 \
            - 2 * P[..., None, :, :] * zb[..., :, None, None] / r1**3
        daP = (eye[:, :, None] * z[..., None, None, :]) / r1**2 \
            - 2 * P[..., None, :, :] * z[..., :, None, None] / r1**3
        r2 = r[..., None, None, None, None]
        e4 = np.einsum
        # d_k d_lbar of delta/rho
        kl = (-eye / r[..., None, None] ** 2 + 2 * _outer_conj(z) / r[..., None, None] ** 3)
        dm0 = kl[..., :, :, None, None] * eye
        # d_k d_lbar of P, index [k, l, i, j]
        t1 = np.broadcast_to(e4("il,jk->klij", eye, eye), z.shape[:-1] + (n,) * 4) / r2**2
        t2 = -2 * e4("...i,jk,...l->...klij", zb, eye, z) / r2**3
        t3 = -2 * (e4("il,...j,...k->...klij", eye, z, zb) + e4("...i,...j,kl->...klij", zb, z, eye)) / r2**3
        t4 = 6 * e4("...i,...j,...k,...l->...klij", zb, z, zb, z) / r2**4
        dmP = t1 + t2 + t3 + t4
        g = self.field(z)
        return g, a * dh0 + b * dhP, a * da0 + b * daP, a * dm0 + b * dmP


@dataclass(frozen=True)
class FubiniStudy(MetricSpec):
    """Affine-chart Fubini-Study metric, g = d dbar log(1 + |z|^2)."""

    kind = "fs"
    is_kahler = True

    def field(self, z):
        z = as_coords(z)
        s = 1 + _absq(z)[..., None, None]
        return _eye(z, self.n) / s - _outer_conj(z) / s**2

    def analytic_jet(self, z):
        z = as_coords(z)
        n = self.n
        eye = np.eye(n)
        zb = np.conj(z)
        s = 1 + _absq(z)
        s3 = s[..., None, None, None]
        P = _outer_conj(z)
        d_hol = (-zb[..., :, None, None] * eye - zb[..., None, :, None] * eye[:, None, :]) / s3**2 \
            + 2 * P[..., None, :, :] * zb[..., :, None, None] / s3**3
        d_anti = (-z[..., :, None, None] * eye - eye[:, :, None] * z[..., None, None, :]) / s3**2 \
            + 2 * P[..., None, :, :] * z[..., :, None, None] / s3**3
        s4 = s[..., None, None, None, None]
        e4 = np.einsum
        base = np.broadcast_to(e4("ij,kl->klij", eye, eye) + e4("il,jk->klij", eye, eye),
                               z.shape[:-1] + (n,) * 4)
        d_mixed = -base / s4**2 \
            + 2 * (e4("ij,...k,...l->...klij", eye, zb, z) + e4("...i,jk,...l->...klij", zb, eye, z)
                   + e4("il,...j,...k->...klij", eye, z, zb) + e4("...i,...j,kl->...klij", zb, z, eye)) / s4**3 \
            - 6 * e4("...i,...j,...k,...l->...klij", zb, z, zb, z) / s4**4
        return self.field(z), d_hol, d_anti, d_mixed


@dataclass(frozen=True)
class InoueModel(MetricSpec):
    """Chart metric diag(1/(2 Im(w)^2), 1) on H x C, coordinates (w, z).

    Its determinant is proportional to the inverse of the canonical-bundle
    weight h = Im(w)^2, so its Chern-Ricci form is the curvature of h^{-1}.
    """

    n: int = 2
    kind = "inoue-k"
    domain = "half-plane-times-plane"
    is_kahler = True

    def __post_init__(self):
        if self.n != 2:
            raise MetricSpecError("inoue model chart is two-dimensional")

    @property
    def weight(self) -> FieldExpr:
        return fielddsl.parse("y1^2")

    def in_domain(self, z):
        return as_coords(z)[..., 0].imag > 0

    def field(self, z):
        z = as_coords(z)
        v = z[..., 0].imag
        g = np.zeros(z.shape[:-1] + (2, 2), dtype=complex)
        g[..., 0, 0] = 1 / (2 * v**2)
        g[..., 1, 1] = 1
        return g

    def analytic_jet(self, z):
        z = as_coords(z)
        v = z[..., 0].imag
        shape = z.shape[:-1]
        d_hol = np.zeros(shape + (2, 2, 2), dtype=complex)
        d_anti = np.zeros_like(d_hol)
        d_mixed = np.zeros(shape + (2,) * 4, dtype=complex)
        # dv/dw = -i/2, dv/dwbar = i/2
        d_hol[..., 0, 0, 0] = 0.5j / v**3
        d_anti[..., 0, 0, 0] = -0.5j / v**3
        d_mixed[..., 0, 0, 0, 0] = 0.75 / v**4
        return self.field(z), d_hol, d_anti, d_mixed

    def to_string(self):
        return "inoue-k"


@dataclass(frozen=True)
class Custom(MetricSpec):
    """Entries given as (real expr, imag expr) on and above the diagonal."""

    entries: tuple = ()  # ((i, j, re_expr, im_expr), ...) 1-based, i <= j
    kind = "custom"

    def field(self, z):
        z = as_coords(z)
        n = self.n
        g = np.zeros(z.shape[:-1] + (n, n), dtype=complex)
        for i, j, re_e, im_e in self.entries:
            re_v = fielddsl.evaluate(re_e, z)
            if i == j:
                g[..., i - 1, i - 1] = re_v
            else:
                val = re_v + 1j * (fielddsl.evaluate(im_e, z) if im_e is not None else 0.0)
                g[..., i - 1, j - 1] = val
                g[..., j - 1, i - 1] = np.conj(val)
        return g

    def to_string(self):
        parts = [f"n={self.n}"]
        for i, j, re_e, im_e in self.entries:
            if i == j or im_e is None:
                parts.append(f"g{i}{j}={re_e.text}")
            else:
                parts.append(f"g{i}{j}=({re_e.text}, {im_e.text})")
        return "custom(" + "; ".join(parts) + ")"


@dataclass(frozen=True)
class Conformal(MetricSpec):
    """e^f times a base metric."""

    base: Optional[MetricSpec] = None
    factor: Optional[FieldExpr] = None
    kind = "conformal"

    @property
    def domain(self):
        return self.base.domain

    @property
    def family(self):
        return self.base.family

    def in_domain(self, z):
        return self.base.in_domain(z)

    def field(self, z):
        z = as_coords(z)
        return np.exp(fielddsl.evaluate(self.factor, z))[..., None, None] * self.base.field(z)

    def factor_jet(self, z, step=None):
        """(f, df/dz, df/dzbar, d2f/dz dzbar) by finite differences with one
        Richardson step, so the combined jet is close to closed-form accuracy."""
        z = as_coords(z)
        if step is None:
            # Richardson differences balance truncation and rounding near 1e-3
            step = 1e-3 * np.maximum(1.0, np.linalg.norm(z, axis=-1))
        f = fielddsl.evaluate(self.factor, z)
        fn = lambda p: fielddsl.evaluate(self.factor, p)  # noqa: E731
        fk, fl = wirtinger_gradients(fn, z, step, self.in_domain, order=4)
        fkl, _ = wirtinger_hessians(fn, z, step, self.in_domain, order=4)
        return f, fk, fl, fkl

    def analytic_jet(self, z, step=None):
        # closed-form base jet combined with a finite-difference jet of f
        z = as_coords(z)
        g0, h0, a0, m0 = self.base.analytic_jet(z)
        f, fk, fl, fkl = self.factor_jet(z, step)
        ef = np.exp(f)[..., None, None]
        d_hol = ef[..., None, :, :] * (fk[..., :, None, None] * g0[..., None, :, :] + h0)
        d_anti = ef[..., None, :, :] * (fl[..., :, None, None] * g0[..., None, :, :] + a0)
        coef = (fkl + fk[..., :, None] * fl[..., None, :])[..., :, :, None, None]
        d_mixed = ef[..., None, None, :, :] * (
            coef * g0[..., None, None, :, :]
            + fk[..., :, None, None, None] * a0[..., None, :, :, :]
            + fl[..., None, :, None, None] * h0[..., :, None, :, :]
            + m0
        )
        return ef * g0, d_hol, d_anti, d_mixed

    def to_string(self):
        return f"conformal({self.base.to_string()}; f={self.factor.text})"


# --------------------------------------------------------------------------
# Constructors


def flat(n: int = 2) -> Flat:
    return Flat(n)


def hopf_standard(n: int = 2) -> HopfStandard:
    return HopfStandard(n)


def hopf_perturbed(n: int = 2) -> HopfPerturbed:
    return HopfPerturbed(n)


def fubini_study(n: int = 2) -> FubiniStudy:
    return FubiniStudy(n)


def inoue_model() -> InoueModel:
    return InoueModel()


def conformal_rescale(spec: MetricSpec, f) -> Conformal:
    """Spec whose evaluation is e^{f(p)} times the base evaluation."""
    return Conformal(spec.n, spec, fielddsl.parse(f))


def conformal_flat(f, n: int = 2) -> Conformal:
    return conformal_rescale(Flat(n), f)


def custom(n: int, entries: dict) -> Custom:
    """``entries`` maps (i, j) with i <= j (1-based) to an expr or (re, im) pair."""
    out = []
    for (i, j), val in sorted(entries.items()):
        if not (1 <= i <= j <= n):
            raise MetricSpecError(f"custom entry g{i}{j} must satisfy 1 <= i <= j <= n")
        if isinstance(val, tuple):
            re_e, im_e = fielddsl.parse(val[0]), fielddsl.parse(val[1])
        else:
            re_e, im_e = fielddsl.parse(val), None
        out.append((i, j, re_e, None if i == j else im_e))
    return Custom(n, tuple(out))


ZOO = {
    "flat": ("flat metric, n >= 1", Flat, 1),
    "hopf0": ("standard Hopf metric delta/|z|^2, n >= 1", HopfStandard, 1),
    "hopfp": ("perturbed Hopf metric, n >= 2", HopfPerturbed, 2),
    "fs": ("Fubini-Study affine chart, n >= 1", FubiniStudy, 1),
    "inoue-k": ("Inoue chart H x C with canonical weight Im(w)^2, n = 2", InoueModel, 2),
    "conformal": ("conformal(<spec>; f=<expr>)", Conformal, 1),
    "custom": ("custom(n=<n>; gIJ=<expr>|(<re>, <im>); ...)", Custom, 1),
}


# --------------------------------------------------------------------------
# Spec-string parsing


def _split_top(text: str, sep: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise MetricSpecError(f"unbalanced parentheses in {text!r}")
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise MetricSpecError(f"unbalanced parentheses in {text!r}")
    parts.append("".join(cur))
    return [p.strip() for p in parts]


def parse_metric(text: str) -> MetricSpec:
    """Parse a CLI metric spec string."""
    if isinstance(text, MetricSpec):
        return text
    t = text.strip()
    try:
        if t.startswith("conformal(") and t.endswith(")"):
            parts = _split_top(t[len("conformal("):-1], ";")
            if len(parts) != 2 or not parts[1].startswith("f="):
                raise MetricSpecError("expected conformal(<spec>; f=<expr>)")
            return conformal_rescale(parse_metric(parts[0]), parts[1][2:])
        if t.startswith("custom(") and t.endswith(")"):
            parts = _split_top(t[len("custom("):-1], ";")
            m = re.fullmatch(r"n\s*=\s*(\d+)", parts[0])
            if not m:
                raise MetricSpecError("custom spec must start with n=<int>")
            n = int(m.group(1))
            entries = {}
            for part in parts[1:]:
                m = re.fullmatch(r"g(\d)(\d)\s*=\s*(.+)", part, re.S)
                if not m:
                    raise MetricSpecError(f"bad custom entry {part!r}")
                val = m.group(3).strip()
                if val.startswith("(") and val.endswith(")"):
                    inner = _split_top(val[1:-1], ",")
                    if len(inner) == 2:
                        val = (inner[0], inner[1])
                entries[(int(m.group(1)), int(m.group(2)))] = val
            return custom(n, entries)
        if t in ("inoue-k", "inoue"):
            return InoueModel()
        m = re.fullmatch(r"([a-z0-9-]+)(?::(.*))?", t)
        if not m or m.group(1) not in ZOO:
            raise MetricSpecError(f"unknown metric {t!r}")
        params = {}
        if m.group(2):
            for kv in m.group(2).split(","):
                k, _, v = kv.partition("=")
                params[k.strip()] = v.strip()
        if set(params) - {"n"}:
            raise MetricSpecError(f"unknown parameters {sorted(set(params) - {'n'})}")
        n = int(params.get("n", 2))
        cls = ZOO[m.group(1)][1]
        if n < ZOO[m.group(1)][2]:
            raise MetricSpecError(f"{m.group(1)} requires n >= {ZOO[m.group(1)][2]}")
        return cls(n)
    except fielddsl.FieldSyntaxError as exc:
        raise MetricSpecError(f"bad field expression in {text!r}: {exc}") from exc


# --------------------------------------------------------------------------
# Evaluation


@dataclass(frozen=True)
class MetricValue:
    """Metric data at a point (or batch of points)."""

    spec: MetricSpec
    z: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    det: np.ndarray
    jet: DerivativeJet
    mode: str = "analytic"
    step: Optional[float] = None

    @property
    def n(self):
        return self.spec.n


def evaluate_metric(spec, p, mode: str = "analytic", step=None, second: bool = True) -> MetricValue:
    """Evaluate a metric with its inverse, determinant and derivative jet.

    ``mode='analytic'`` uses closed-form jets (for conformal specs the
    factor's derivatives are still finite differences); ``mode='fd'``
    differentiates the matrix field numerically.  ``second=False`` skips the
    mixed second derivatives.
    """
    spec = parse_metric(spec)
    z = as_coords(p)
    spec.check_domain(z)
    if mode == "analytic":
        if isinstance(spec, Conformal):
            g, dh, da, dm = spec.analytic_jet(z, step)
        else:
            g, dh, da, dm = spec.analytic_jet(z)
        jet = DerivativeJet(g, dh, da, dm if second else None, "analytic", step)
    elif mode == "fd":
        jet = fd_jet(spec.field, z, step, spec.in_domain, second=second)
        g = jet.value
    else:
        raise ValueError(f"unknown derivative mode {mode!r}")
    chol = cholesky_or_raise(g)
    det = np.prod(np.real(np.diagonal(chol, axis1=-2, axis2=-1)), axis=-1) ** 2
    g_inv = invert_hermitian(g)
    return MetricValue(spec, z, g, g_inv, det, jet, mode, step)
