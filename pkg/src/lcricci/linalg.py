"""Dense complex linear algebra and finite-difference Wirtinger derivatives.

Every array routine here is vectorised over leading axes: a batch of chart
points is a complex array of shape ``(..., n)`` and a matrix field evaluated
on it has shape ``(..., n, n)``.  Index conventions used throughout the
package:

* ``g[..., i, j]`` is :math:`g_{i\\bar j}`.
* ``g_inv[..., i, j]`` is :math:`g^{i\\bar j}`, normalised so that
  :math:`\\sum_q g^{i\\bar q} g_{k\\bar q} = \\delta_{ik}`.  Note this is the
  *transpose* of ``numpy.linalg.inv(g)``.
* ``d_hol[..., k, i, j]`` is :math:`\\partial g_{i\\bar j}/\\partial z^k`,
  ``d_anti[..., l, i, j]`` is :math:`\\partial g_{i\\bar j}/\\partial\\bar z^l`,
  ``d_mixed[..., k, l, i, j]`` is
  :math:`\\partial^2 g_{i\\bar j}/\\partial z^k\\partial\\bar z^l`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

TAU_SYM_ANALYTIC = 1e-12
TAU_SYM_FD = 1e-8
TAU_LIN = 1e-10
DEFAULT_RELATIVE_STEP = 1e-4


class DegenerateMetricError(ValueError):
    """Raised when a metric matrix fails the positive-definiteness test."""


class StencilDomainError(ValueError):
    """Raised when a finite-difference stencil leaves the chart's domain."""


@dataclass(frozen=True)
class ChartPoint:
    """A point of a local holomorphic chart."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coords, dtype=complex))
        if c.ndim != 1 or c.size < 1:
            raise ValueError("chart point needs n >= 1 coordinates")
        if not np.all(np.isfinite(c)):
            raise ValueError("chart point coordinates must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def n(self) -> int:
        return self.coords.size

    def __array__(self, dtype=None, copy=None):
        return np.array(self.coords, dtype=dtype)


def as_coords(p) -> np.ndarray:
    """Coerce a ChartPoint, sequence or array to a complex coordinate array."""
    if isinstance(p, ChartPoint):
        return p.coords
    return np.asarray(p, dtype=complex)


def default_step(z: np.ndarray) -> np.ndarray:
    """Per-point default step ``1e-4 * max(1, |p|)``; shape ``z.shape[:-1]``."""
    return DEFAULT_RELATIVE_STEP * np.maximum(1.0, np.linalg.norm(z, axis=-1))


def _step_array(z: np.ndarray, step) -> np.ndarray:
    if step is None:
        return default_step(z)
    h = np.broadcast_to(np.asarray(step, dtype=float), z.shape[:-1])
    if np.any(h <= 0):
        raise ValueError("finite-difference step must be positive")
    return h


# --------------------------------------------------------------------------
# Hermitian matrices


def hermitian_defect(m: np.ndarray) -> float:
    """Max-abs deviation from conjugate symmetry."""
    m = np.asarray(m)
    return float(np.max(np.abs(m - np.conj(np.swapaxes(m, -1, -2))), initial=0.0))


def cholesky_or_raise(m: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of a Hermitian positive-definite matrix (stack).

    The factor is taken of the Hermitian part, so tiny asymmetries from
    finite differencing do not break the test.
    """
    m = np.asarray(m, dtype=complex)
    herm = 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))
    try:
        return np.linalg.cholesky(herm)
    except np.linalg.LinAlgError as exc:
        raise DegenerateMetricError("metric degenerate at point") from exc


def is_positive_definite(m: np.ndarray) -> bool:
    try:
        cholesky_or_raise(m)
    except DegenerateMetricError:
        return False
    return True


def invert_hermitian(m: np.ndarray) -> np.ndarray:
    """Inverse metric :math:`g^{i\\bar j}` of a Hermitian positive-definite matrix.

    Positive definiteness is confirmed by a Cholesky attempt; the inverse
    itself comes from LAPACK's LU with partial pivoting.  The result is
    transposed so that ``einsum('...iq,...kq->...ik', inv, m)`` is the
    identity.
    """
    m = np.asarray(m, dtype=complex)
    cholesky_or_raise(m)
    return np.swapaxes(np.linalg.inv(m), -1, -2)


def log_det_hermitian(m: np.ndarray) -> np.ndarray:
    """log det of a Hermitian positive-definite matrix via its Cholesky factor."""
    chol = cholesky_or_raise(m)
    return 2.0 * np.sum(np.log(np.real(np.diagonal(chol, axis1=-2, axis2=-1))), axis=-1)


# --------------------------------------------------------------------------
# Finite-difference Wirtinger calculus


def _real_unit(n: int, a: int) -> np.ndarray:
    """Complex displacement direction for real coordinate ``a`` (x_1..x_n, y_1..y_n)."""
    e = np.zeros(n, dtype=complex)
    e[a % n] = 1.0 if a < n else 1.0j
    return e


def _evaluate_on_stencil(field, z, offsets, h, domain):
    """Evaluate ``field`` at ``z + h * offsets``; offsets has shape (m, n).

    Returns an array of shape ``z.shape[:-1] + (m,) + value_shape``.
    """
    pts = z[..., None, :] + h[..., None, None] * offsets
    if domain is not None and not np.all(domain(pts)):
        raise StencilDomainError("stencil outside domain")
    return np.asarray(field(pts))


def wirtinger_gradients(
    field: Callable[[np.ndarray], np.ndarray],
    z,
    step=None,
    domain: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    order: int = 2,
):
    """Holomorphic and antiholomorphic first derivatives of a field.

    ``field`` maps coordinates ``(..., n)`` to values ``(..., *S)``.  Returns
    ``(d_hol, d_anti)`` each of shape ``(..., n, *S)`` computed with
    second-order central differences in the underlying real coordinates;
    ``order=4`` adds one Richardson extrapolation (steps h and h/2).
    """
    z = as_coords(z)
    n = z.shape[-1]
    h = _step_array(z, step)
    if order == 4:
        h1, a1 = wirtinger_gradients(field, z, h, domain)
        h2, a2 = wirtinger_gradients(field, z, h / 2, domain)
        return (4 * h2 - h1) / 3, (4 * a2 - a1) / 3
    if order != 2:
        raise ValueError("order must be 2 or 4")
    offsets = np.concatenate([np.eye(n), -np.eye(n), 1j * np.eye(n), -1j * np.eye(n)])
    vals = _evaluate_on_stencil(field, z, offsets, h, domain)
    b = z.ndim - 1
    hh = h.reshape(h.shape + (1,) * (vals.ndim - b))
    dx = (np.take(vals, range(0, n), axis=b)
          - np.take(vals, range(n, 2 * n), axis=b)) / (2 * hh)
    dy = (np.take(vals, range(2 * n, 3 * n), axis=b)
          - np.take(vals, range(3 * n, 4 * n), axis=b)) / (2 * hh)
    return 0.5 * (dx - 1j * dy), 0.5 * (dx + 1j * dy)


def real_hessian(field, z, step=None, domain=None):
    """Hessian in the 2n real coordinates (x_1..x_n, y_1..y_n).

    Off-diagonal entries use the four-point cross stencil (nested central
    first differences), diagonal entries the three-point second difference.
    Returns ``(value_at_z, H)`` with ``H`` of shape ``(..., 2n, 2n, *S)``.
    """
    z = as_coords(z)
    n = z.shape[-1]
    m = 2 * n
    h = _step_array(z, step)
    units = np.array([_real_unit(n, a) for a in range(m)])
    offsets = [np.zeros(n, dtype=complex)]
    for a in range(m):
        offsets += [units[a], -units[a]]
    pairs = [(a, c) for a in range(m) for c in range(a + 1, m)]
    for a, c in pairs:
        offsets += [units[a] + units[c], units[a] - units[c],
                    -units[a] + units[c], -units[a] - units[c]]
    offsets = np.array(offsets)
    vals = _evaluate_on_stencil(field, z, offsets, h, domain)
    b = z.ndim - 1
    vals = np.moveaxis(vals, b, 0)  # stencil axis first
    centre = vals[0]
    hh = h.reshape(h.shape + (1,) * (centre.ndim - b))
    hess = np.empty((m, m) + centre.shape, dtype=np.result_type(vals, float))
    for a in range(m):
        hess[a, a] = (vals[1 + 2 * a] - 2 * centre + vals[2 + 2 * a]) / hh**2
    base = 1 + 2 * m
    for idx, (a, c) in enumerate(pairs):
        pp, pm, mp, mm = vals[base + 4 * idx: base + 4 * idx + 4]
        hess[a, c] = hess[c, a] = (pp - pm - mp + mm) / (4 * hh**2)
    # move (2n, 2n) behind the batch axes
    hess = np.moveaxis(hess, (0, 1), (b, b + 1))
    return centre, hess


def wirtinger_hessians(field, z, step=None, domain=None, order: int = 2, holhol: bool = False):
    """Mixed (and optionally pure holomorphic) second Wirtinger derivatives.

    Returns ``(d_mixed, d_holhol)`` of shape ``(..., n, n, *S)`` where
    ``d_mixed[..., i, j] = d^2 f / dz^i d zbar^j``.  ``order=4`` applies one
    Richardson extrapolation (steps h and h/2).
    """
    z = as_coords(z)
    if order == 4:
        h = _step_array(z, step)
        m1, p1 = wirtinger_hessians(field, z, h, domain, 2, holhol)
        m2, p2 = wirtinger_hessians(field, z, h / 2, domain, 2, holhol)
        mixed = (4 * m2 - m1) / 3
        hh = None if not holhol else (4 * p2 - p1) / 3
        return mixed, hh
    if order != 2:
        raise ValueError("order must be 2 or 4")
    n = z.shape[-1]
    _, H = real_hessian(field, z, step, domain)
    b = z.ndim - 1
    sl = (slice(None),) * b
    hxx = H[sl + (slice(0, n), slice(0, n))]
    hxy = H[sl + (slice(0, n), slice(n, 2 * n))]
    hyx = H[sl + (slice(n, 2 * n), slice(0, n))]
    hyy = H[sl + (slice(n, 2 * n), slice(n, 2 * n))]
    mixed = 0.25 * (hxx + 1j * hxy - 1j * hyx + hyy)
    pure = 0.25 * (hxx - 1j * hxy - 1j * hyx - hyy) if holhol else None
    return mixed, pure


def wirtinger_derivative(field, p, index: int, kind: str = "holomorphic", step=None, domain=None):
    """Single Wirtinger derivative d/dz^index or d/dzbar^index (1-based index).

    ``kind`` is ``"holomorphic"``, ``"antiholomorphic"`` or ``"mixed"``; for
    ``"mixed"`` ``index`` is a pair ``(i, j)`` giving d^2/dz^i dzbar^j.
    """
    z = as_coords(p)
    if step is not None and np.any(np.asarray(step) <= 0):
        raise ValueError("finite-difference step must be positive")
    n = z.shape[-1]
    b = z.ndim - 1
    if kind == "mixed":
        i, j = index
        _check_index(i, n)
        _check_index(j, n)
        mixed, _ = wirtinger_hessians(field, z, step, domain)
        return mixed[(slice(None),) * b + (i - 1, j - 1)]
    _check_index(index, n)
    d_hol, d_anti = wirtinger_gradients(field, z, step, domain)
    if kind == "holomorphic":
        return d_hol[(slice(None),) * b + (index - 1,)]
    if kind == "antiholomorphic":
        return d_anti[(slice(None),) * b + (index - 1,)]
    raise ValueError(f"unknown derivative kind {kind!r}")


def _check_index(i, n):
    if not 1 <= i <= n:
        raise IndexError(f"coordinate index {i} outside 1..{n}")


# --------------------------------------------------------------------------
# Derivative jets


@dataclass(frozen=True)
class DerivativeJet:
    """Metric value with its first and mixed second Wirtinger derivatives."""

    value: np.ndarray
    d_hol: np.ndarray
    d_anti: np.ndarray
    d_mixed: Optional[np.ndarray]
    source: str
    step: Optional[float] = None
    d_holhol: Optional[np.ndarray] = None

    def symmetry_defect(self) -> float:
        """max |d_anti[l][a][b] - conj(d_hol[l][b][a])| (and the mixed analogue)."""
        d = np.abs(self.d_anti - np.conj(np.swapaxes(self.d_hol, -1, -2)))
        out = float(np.max(d, initial=0.0))
        if self.d_mixed is not None:
            # conj(d_k d_lbar g_ba) = d_l d_kbar g_ab
            mt = np.conj(np.swapaxes(np.swapaxes(self.d_mixed, -1, -2), -3, -4))
            out = max(out, float(np.max(np.abs(self.d_mixed - mt), initial=0.0)))
        return out


def fd_jet(field, z, step=None, domain=None, second: bool = True, holhol: bool = False) -> DerivativeJet:
    """Finite-difference jet of a matrix field at ``z`` (vectorised)."""
    z = as_coords(z)
    value = np.asarray(field(z))
    d_hol, d_anti = wirtinger_gradients(field, z, step, domain)
    d_mixed = d_hh = None
    if second or holhol:
        d_mixed, d_hh = wirtinger_hessians(field, z, step, domain, holhol=holhol)
    s = None if step is None else float(np.max(step))
    return DerivativeJet(value, d_hol, d_anti, d_mixed, "finite-difference", s, d_hh)
