"""Norms and norm reports.

Conventions (fixed here once, used everywhere):

- ``l2``        : Parseval, sqrt(V * sum |f_hat|^2), summed over components.
- ``l_inf``     : max over the collocation grid and components of |f|.
- ``w1_inf``    : l_inf plus the largest L-infinity norm over all first
                  partials and components.
- ``hk[k]``     : sqrt(sum_{j<=k} || |grad|^j f ||_L2^2), i.e. the spectral
                  weight sum_j |k|^(2j); monotone nondecreasing in k.
- ``besov_3_11``: dyadic-shell proxy for the homogeneous B^3_{1,1} norm,
                  sum_j 2^(3j) * || P_j f ||_L1 with shells 2^j <= |k| < 2^(j+1)
                  and the L1 norm of the pointwise Euclidean magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .field import SpectralField

__all__ = ["NormReport", "norms", "l2_norm", "linf_norm", "besov_proxy"]


@dataclass(frozen=True)
class NormReport:
    l2: float
    l_inf: float
    w1_inf: float
    hk: dict[int, float]
    besov_3_11: float


def _comp_view(field: SpectralField) -> np.ndarray:
    c = field.coeffs
    return c[None] if c.ndim == 3 else c


def l2_norm(field: SpectralField) -> float:
    c = _comp_view(field)
    return float(np.sqrt(field.grid.volume * np.sum(np.abs(c) ** 2)))


def _physical(field: SpectralField) -> np.ndarray:
    c = _comp_view(field)
    return sfft.ifftn(c, axes=(-3, -2, -1), norm="forward").real


def linf_norm(field: SpectralField) -> float:
    return float(np.max(np.abs(_physical(field))))


def grad_linf_norm(field: SpectralField) -> float:
    """Largest L-infinity norm over all first partials and components."""
    g = field.grid
    c = _comp_view(field)
    worst = 0.0
    for ik in (1j * g.kx, 1j * g.ky, 1j * g.kz):
        d = sfft.ifftn(ik * c, axes=(-3, -2, -1), norm="forward").real
        worst = max(worst, float(np.max(np.abs(d))))
    return worst


def hk_norms(field: SpectralField, orders: tuple[int, ...]) -> dict[int, float]:
    g = field.grid
    c = _comp_view(field)
    e = np.sum(np.abs(c) ** 2, axis=0)
    out = {}
    for k in orders:
        weight = np.ones_like(g.k2)
        acc = np.zeros_like(g.k2)
        for _ in range(k + 1):
            acc += weight
            weight = weight * g.k2
        out[int(k)] = float(np.sqrt(g.volume * np.sum(acc * e)))
    return out


def besov_proxy(field: SpectralField) -> float:
    """sum_j 2^(3j) L1(shell_j f); shells on |k| with the k=0 mode excluded."""
    g = field.grid
    c = _comp_view(field)
    kmax = float(np.max(g.kmag))
    if kmax < 1.0:
        return 0.0
    jmax = int(np.floor(np.log2(kmax)))
    total = 0.0
    for j in range(jmax + 1):
        shell = (g.kmag >= 2.0**j) & (g.kmag < 2.0 ** (j + 1))
        if not shell.any():
            continue
        piece = sfft.ifftn(c * shell, axes=(-3, -2, -1), norm="forward").real
        mag = np.sqrt(np.sum(piece**2, axis=0))
        l1 = g.volume * float(np.mean(mag))
        total += 2.0 ** (3 * j) * l1
    return total


def norms(field: SpectralField, orders: tuple[int, ...] = (1, 2, 3)) -> NormReport:
    """Full norm report for a spectral field."""
    linf = linf_norm(field)
    return NormReport(
        l2=l2_norm(field),
        l_inf=linf,
        w1_inf=linf + grad_linf_norm(field),
        hk=hk_norms(field, orders),
        besov_3_11=besov_proxy(field),
    )
