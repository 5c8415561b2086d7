"""Levi-Civita connection coefficients on the holomorphic tangent bundle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metrics import MetricValue, evaluate_metric


class MissingJetError(ValueError):
    pass


@dataclass(frozen=True)
class ConnectionCoeffs:
    """``gamma_hol[..., k, i, j]`` is Gamma^k_{ij}; ``gamma_mixed[..., k, i, j]`` is Gamma^k_{ibar j}."""

    gamma_hol: np.ndarray
    gamma_mixed: np.ndarray


def lc_coefficients(m: MetricValue) -> ConnectionCoeffs:
    """Levi-Civita coefficients from the metric's first-derivative jet.

    Gamma^k_{ij}     = 1/2 g^{k lbar} (d_i g_{j lbar} + d_j g_{i lbar})
    Gamma^k_{ibar j} = 1/2 g^{k lbar} (d_ibar g_{j lbar} - d_lbar g_{j ibar})
    """
    jet = m.jet
    if jet is None or jet.d_hol is None or jet.d_anti is None:
        raise MissingJetError("connection coefficients need first-derivative jets")
    ginv = m.g_inv
    half = np.einsum("...kl,...ijl->...kij", ginv, jet.d_hol)
    gamma_hol = 0.5 * (half + np.swapaxes(half, -1, -2))
    first = np.einsum("...kl,...ijl->...kij", ginv, jet.d_anti)
    second = np.einsum("...kl,...lji->...kij", ginv, jet.d_anti)
    return ConnectionCoeffs(gamma_hol, 0.5 * (first - second))


def coefficient_field(spec, mode="analytic", step=None):
    """Callable z -> stacked (gamma_hol, gamma_mixed), shape (..., 2, n, n, n)."""

    def fieldfn(z):
        c = lc_coefficients(evaluate_metric(spec, z, mode, step, second=False))
        return np.stack([c.gamma_hol, c.gamma_mixed], axis=-4)

    return fieldfn


def compatibility_defect(m: MetricValue, c: ConnectionCoeffs) -> float:
    """max | d_k g_{i jbar} - Gamma^s_{ki} g_{s jbar} - conj(Gamma^s_{kbar j}) g_{i sbar} |."""
    rebuilt = np.einsum("...ski,...sj->...kij", c.gamma_hol, m.g) + np.einsum(
        "...skj,...is->...kij", np.conj(c.gamma_mixed), m.g
    )
    return float(np.max(np.abs(rebuilt - m.jet.d_hol), initial=0.0))
