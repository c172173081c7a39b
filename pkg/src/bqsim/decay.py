"""Whole-space oscillatory-integral probe of dispersive decay.

Evaluates I(t, x) = int_{R^3} exp(i x.xi + i t |xi_h|/|xi|) phi(xi) dxi
for a smooth radial bump phi supported in an annulus.  In spherical
coordinates xi = rho (sin A cos H, sin A sin H, cos A) the dispersive
phase collapses to t sin A, so the t-oscillation lives along the polar
angle alone and the integrand stays a smooth tensor-product function:

    I = int_rho int_A int_H  rho^2 phi(rho) sin A
        exp(i [t sin A + rho (c(H) sin A + x3 cos A)]) dH dA drho,
    c(H) = x1 cos H + x2 sin H.

Each axis gets composite 10-node Gauss-Legendre panels, with the panel
count scaled to the worst-case number of phase oscillations along that
axis so the requested nodes-per-wavelength resolution holds.  A direct
Cartesian tensor grid would need the t-resolution in all three axes
(~1e13 nodes at t = 1e4); here only the polar axis grows with t.

Node positions depend only on (t, x, bump, resolution), so repeated
calls are bitwise deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModeError, QuadratureBudgetError

__all__ = [
    "BumpSpec",
    "decay_probe",
    "probe_integral",
    "phase_gradient",
    "phase_hessian_invsqrt",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)

# panel floors for the t = 0 geometry (bump profile, sin A, theta circle)
_BASE_PANELS_RHO = 12
_BASE_PANELS_ALPHA = 8
_BASE_PANELS_THETA = 2

_ALPHA_CHUNK = 20000  # nodes per block, keeps work arrays ~tens of MB


@dataclass(frozen=True)
class BumpSpec:
    """Radial annulus bump phi(xi) = profile(|xi|).

    profile(rho) = amplitude * exp(-width * (1/(1-s^2) - 1)) with
    s = (2 rho - lo - hi)/(hi - lo), identically zero outside the open
    annulus lo < |xi| < hi.  All derivatives vanish at the support
    boundary, so Gauss-Legendre panels converge fast.
    """

    amplitude: float = 1.0
    width: float = 1.0
    support: tuple[float, float] = (0.5, 2.0)

    def __post_init__(self):
        lo, hi = self.support
        if not (0.0 < lo < hi):
            raise ValueError(f"bump support must satisfy 0 < lo < hi, got {self.support}")
        if self.amplitude <= 0 or self.width <= 0:
            raise ValueError("bump amplitude and width must be positive")

    def profile(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        lo, hi = self.support
        s = (2.0 * rho - (lo + hi)) / (hi - lo)
        out = np.zeros_like(s)
        inside = np.abs(s) < 1.0
        si = s[inside]
        out[inside] = self.amplitude * np.exp(-self.width * (1.0 / (1.0 - si * si) - 1.0))
        return out


def _panel_nodes(lo: float, hi: float, panels: int):
    """Composite Gauss-Legendre nodes and weights on [lo, hi]."""
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    weights = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return nodes, weights


def _panel_counts(t: float, x: np.ndarray, bump: BumpSpec, npw: float):
    """Worst-case phase cycles per axis -> composite panel counts."""
    lo, hi = bump.support
    xnorm = float(np.linalg.norm(x))
    xh = float(np.hypot(x[0], x[1]))
    cycles_rho = xnorm * (hi - lo) / (2.0 * np.pi)
    cycles_alpha = (t + 2.0 * hi * xnorm) / 2.0
    cycles_theta = hi * xh
    per_panel = 10.0 / npw  # cycles one 10-node panel resolves at npw nodes/wavelength
    p_rho = max(_BASE_PANELS_RHO, int(np.ceil(cycles_rho / per_panel)))
    p_alpha = max(_BASE_PANELS_ALPHA, int(np.ceil(cycles_alpha / per_panel)))
    p_theta = max(_BASE_PANELS_THETA, int(np.ceil(cycles_theta / per_panel)))
    return p_rho, p_alpha, p_theta


def _max_resolvable_t(x: np.ndarray, bump: BumpSpec, npw: float, max_nodes: int) -> float:
    """Largest t whose node budget fits max_nodes at this sample point."""
    lo, hi = bump.support
    p_rho, _, p_theta = _panel_counts(0.0, x, bump, npw)
    theta_trivial = float(np.hypot(x[0], x[1])) == 0.0
    fixed = 10 * p_rho * (1 if theta_trivial else 10 * p_theta)
    alpha_nodes = max_nodes / fixed
    cycles = (alpha_nodes / 10.0) * (10.0 / npw)
    return max(0.0, 2.0 * cycles - 2.0 * hi * float(np.linalg.norm(x)))


def probe_integral(
    t: float,
    x,
    bump: BumpSpec,
    nodes_per_wavelength: float = 20.0,
    max_nodes: int = 2_000_000_000,
) -> complex:
    """I(t, x) at a single sample point."""
    if t < 0:
        raise ValueError("probe time must be nonnegative")
    if nodes_per_wavelength < 10:
        raise ValueError("resolution below 10 nodes per wavelength is not supported")
    x = np.asarray(x, dtype=float).reshape(3)
    npw = float(nodes_per_wavelength)

    p_rho, p_alpha, p_theta = _panel_counts(t, x, bump, npw)
    xh = float(np.hypot(x[0], x[1]))
    theta_trivial = xh == 0.0
    n_theta = 1 if theta_trivial else 10 * p_theta
    total = 10 * p_rho * 10 * p_alpha * n_theta
    if total > max_nodes:
        tmax = _max_resolvable_t(x, bump, npw, max_nodes)
        raise QuadratureBudgetError(
            f"quadrature needs {total} nodes at t={t:g} (budget {max_nodes}); "
            f"maximum resolvable t at this point is {tmax:.6g}",
            max_time=tmax,
        )

    lo, hi = bump.support
    rho, w_rho = _panel_nodes(lo, hi, p_rho)
    alpha, w_alpha = _panel_nodes(0.0, np.pi, p_alpha)
    f_rho = w_rho * rho * rho * bump.profile(rho)

    if theta_trivial:
        c_vals = np.array([0.0])
        w_theta = np.array([2.0 * np.pi])
    else:
        theta, w_theta = _panel_nodes(0.0, 2.0 * np.pi, p_theta)
        c_vals = x[0] * np.cos(theta) + x[1] * np.sin(theta)

    sin_a = np.sin(alpha)
    cos_a = np.cos(alpha)
    g_alpha = w_alpha * sin_a * np.exp(1j * t * sin_a)

    acc = 0.0 + 0.0j
    for start in range(0, alpha.size, _ALPHA_CHUNK):
        sl = slice(start, start + _ALPHA_CHUNK)
        sa, ca, ga = sin_a[sl], cos_a[sl], g_alpha[sl]
        for c, wt in zip(c_vals, w_theta):
            inner = np.exp(1j * (rho[:, None] * (c * sa + x[2] * ca)[None, :]))
            acc += wt * (f_rho @ inner @ ga)
    return complex(acc)


def decay_probe(
    t: float,
    bump: BumpSpec,
    sample_points,
    nodes_per_wavelength: float = 20.0,
    max_nodes: int = 2_000_000_000,
) -> float:
    """sup over sample_points of |I(t, x)|."""
    pts = [np.asarray(p, dtype=float).reshape(3) for p in sample_points]
    if not pts:
        raise ValueError("decay_probe needs at least one sample point")
    return max(
        abs(probe_integral(t, p, bump, nodes_per_wavelength, max_nodes)) for p in pts
    )


def phase_gradient(xi) -> np.ndarray:
    """Gradient of xi -> |xi_h|/|xi| at a nondegenerate wavevector."""
    x1, x2, x3 = (float(v) for v in xi)
    kh = np.hypot(x1, x2)
    if kh == 0.0:
        raise DegenerateModeError(f"phase gradient undefined at xi = {tuple(xi)} (xi_h = 0)")
    k = np.sqrt(kh * kh + x3 * x3)
    pref = x3 / k**3
    return pref * np.array([x1 * x3 / kh, x2 * x3 / kh, -kh])


def phase_hessian_invsqrt(xi) -> float:
    """|det Hess|^{-1/2} of the phase at a stationary point: |xi3|^{-2} |xi_h|^{1/2} |xi|^{9/2}."""
    x1, x2, x3 = (float(v) for v in xi)
    kh = np.hypot(x1, x2)
    if kh == 0.0 or x3 == 0.0:
        raise DegenerateModeError(
            f"hessian quantity undefined at xi = {tuple(xi)} (needs xi_h != 0 and xi3 != 0)"
        )
    k = np.sqrt(kh * kh + x3 * x3)
    return abs(x3) ** -2 * np.sqrt(kh) * k**4.5
