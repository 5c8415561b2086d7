"""Exterior algebra of (p,q)-forms at a point, with jet-valued coefficients.

A form is a dict from a sorted tuple of generator indices to a coefficient.
Generator ``k`` (0 <= k < n) is dz^{k+1} and generator ``n + l`` is
dzbar^{l+1}; the canonical top monomial is dz^1..dz^n dzbar^1..dzbar^n.
Coefficients may be plain arrays or :class:`Jet` objects, which carry first
and mixed second Wirtinger derivatives through products by the Leibniz rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np


@dataclass(frozen=True)
class Jet:
    """Scalar field germ: value, d/dz^k, d/dzbar^l and d^2/dz^k dzbar^l."""

    value: np.ndarray
    hol: np.ndarray
    anti: np.ndarray
    mixed: np.ndarray

    __array_ufunc__ = None  # keep numpy from broadcasting over a Jet

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.value + other.value, self.hol + other.hol,
                       self.anti + other.anti, self.mixed + other.mixed)
        return Jet(self.value + other, self.hol, self.anti, self.mixed)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.value, -self.hol, -self.anti, -self.mixed)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            c = np.asarray(other)
            return Jet(self.value * c, self.hol * c[..., None], self.anti * c[..., None],
                       self.mixed * c[..., None, None])
        v1, v2 = self.value[..., None], other.value[..., None]
        mixed = (self.mixed * other.value[..., None, None] + self.value[..., None, None] * other.mixed
                 + self.hol[..., :, None] * other.anti[..., None, :]
                 + self.anti[..., None, :] * other.hol[..., :, None])
        return Jet(self.value * other.value, self.hol * v2 + v1 * other.hol,
                   self.anti * v2 + v1 * other.anti, mixed)

    __rmul__ = __mul__


def _sort_sign(gens):
    """Sorted tuple and permutation sign; (None, 0) if a generator repeats."""
    if len(set(gens)) != len(gens):
        return None, 0
    arr = list(gens)
    sign = 1
    for i in range(len(arr)):
        for j in range(len(arr) - 1 - i):
            if arr[j] > arr[j + 1]:
                arr[j], arr[j + 1] = arr[j + 1], arr[j]
                sign = -sign
    return tuple(arr), sign


def wedge(a: dict, b: dict) -> dict:
    out: dict = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            key, sign = _sort_sign(ma + mb)
            if key is None:
                continue
            term = ca * cb if sign > 0 else -(ca * cb)
            out[key] = out[key] + term if key in out else term
    return out


def power(a: dict, k: int) -> dict:
    if k == 0:
        return {(): 1.0}
    out = a
    for _ in range(k - 1):
        out = wedge(out, a)
    return out


def form11(coeff: np.ndarray, n: int, scale=1j) -> dict:
    """scale * A_{i jbar} dz^i ^ dzbar^j as a form dict (plain coefficients)."""
    return {(i, n + j): scale * coeff[..., i, j] for i in range(n) for j in range(n)}


def omega_jet_form(g, d_hol, d_anti, d_mixed) -> dict:
    """The Kahler form sqrt(-1) g_{i jbar} dz^i ^ dzbar^j with jet coefficients."""
    n = g.shape[-1]
    out = {}
    for i in range(n):
        for j in range(n):
            out[(i, n + j)] = Jet(
                1j * g[..., i, j],
                1j * d_hol[..., :, i, j],
                1j * d_anti[..., :, i, j],
                1j * d_mixed[..., :, :, i, j],
            )
    return out


def ddbar(form: dict, n: int) -> dict:
    """d dbar of a jet-valued form: sum_{k,l} c_{k lbar} dz^k ^ dzbar^l ^ (monomial)."""
    out: dict = {}
    for mono, c in form.items():
        for k in range(n):
            for l in range(n):
                key, sign = _sort_sign((k, n + l) + mono)
                if key is None:
                    continue
                term = sign * c.mixed[..., k, l]
                out[key] = out[key] + term if key in out else term
    return out


def exterior_d(form: dict, n: int) -> dict:
    """d = d + dbar of a jet-valued form (values only)."""
    out: dict = {}
    for mono, c in form.items():
        for k in range(n):
            for gen, coeff in ((k, c.hol[..., k]), (n + k, c.anti[..., k])):
                key, sign = _sort_sign((gen,) + mono)
                if key is None:
                    continue
                term = sign * coeff
                out[key] = out[key] + term if key in out else term
    return out


def top_key(n: int) -> tuple:
    return tuple(range(2 * n))


def top_to_lebesgue(n: int) -> complex:
    """Factor turning the canonical top-monomial coefficient into a density
    against Lebesgue measure dx^1 dy^1 ... dx^n dy^n."""
    return (-2j) ** n * (-1) ** (n * (n - 1) // 2)


def volume_density(det: np.ndarray, n: int) -> np.ndarray:
    """omega^n as a Lebesgue density: n! 2^n det g."""
    return factorial(n) * 2**n * np.asarray(det)
