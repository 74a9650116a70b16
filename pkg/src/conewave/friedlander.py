"""Friedlander's periodized construction of the sine kernel on C_alpha.

The multivalued plane solution

    G(y, z) = H(y + cos z) H(pi - |z|),                    y < 1
    G(y, z) = (1/pi) [ arctan((pi - z)/arccosh y)
                      + arctan((pi + z)/arccosh y) ],      y > 1

(the sign of the second branch is pinned by the degenerate alpha = 2 pi
case, where the periodization telescopes to the constant 1 and the plane
kernel has no diffracted front) is periodized over z -> z + alpha k and
mapped to the kernel by
A = A3 A2 A1 with A1 the half-derivative in y (kernel |y - y'|^(-1/2),
causal side), A2 the pullback through

    y = (t^2 - r1^2 - r2^2) / (2 r1 r2),   z = theta1 - theta2,

and A3 multiplication by (2 pi sqrt(2 r1 r2))^(-1).  The slowly decaying
arctan translates are summed directly up to a cutoff with digamma /
polygamma closed forms for the tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.special
from scipy.interpolate import RectBivariateSpline

from .errors import OutOfGrid
from .geometry import check_cone_angle, reduce_angle
from .kernels import FRONT_TOL, KernelQuery, KernelValue, _fronts, classify_region
from .special import GAMMA_HALF, l1_half_derivative


@dataclass(frozen=True)
class FriedlanderGrid:
    """Sampled G_alpha and its half-derivative on a (y, z) grid.

    `z` covers one full period [-alpha/2, alpha/2]; `ag` holds
    Gamma(1/2) * [d/dy]^{1/2} G_alpha, ready for pullback.
    """

    alpha: float
    y: np.ndarray
    z: np.ndarray
    g: np.ndarray
    ag: np.ndarray
    _spline: RectBivariateSpline

    @property
    def y_range(self) -> tuple[float, float]:
        return float(self.y[0]), float(self.y[-1])


def _g_alpha_low(alpha: float, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Periodized y < 1 branch: sum_k H(y + cos(z + alpha k)) H(pi - |z + alpha k|)."""
    out = np.zeros((y.size, z.size))
    k_lo = math.ceil((-math.pi - z.max()) / alpha) - 1
    k_hi = math.floor((math.pi - z.min()) / alpha) + 1
    for k in range(k_lo, k_hi + 1):
        zp = z + alpha * k
        gate = np.abs(zp) < math.pi
        if not np.any(gate):
            continue
        step = (y[:, None] + np.cos(zp)[None, :]) > 0.0
        out += step * gate[None, :]
    return out


def _g_alpha_high(alpha: float, y: np.ndarray, z: np.ndarray,
                  k_direct: int) -> np.ndarray:
    """Periodized y > 1 branch with polygamma tail corrections."""
    c = np.arccosh(y)[:, None]  # (Ny, 1)
    total = np.zeros((y.size, z.size))
    for k in range(-k_direct, k_direct + 1):
        zp = (z + alpha * k)[None, :]
        total += np.arctan((math.pi - zp) / c) + np.arctan((math.pi + zp) / c)

    # tails k > K and k < -K of arctan((pi - z')/c) + arctan((pi + z')/c)
    # ~ c [1/(z'-pi) - 1/(z'+pi)] - (c^3/3) [1/(z'-pi)^3 - 1/(z'+pi)^3]
    kk = k_direct + 1
    x1 = (z - math.pi) / alpha
    x2 = (z + math.pi) / alpha
    x1m = (-z - math.pi) / alpha
    x2m = (-z + math.pi) / alpha
    psi = scipy.special.digamma
    psi2 = lambda x: scipy.special.polygamma(2, x)
    lead = (psi(kk + x2) - psi(kk + x1) + psi(kk + x2m) - psi(kk + x1m))
    cubic = 0.5 * (psi2(kk + x2) - psi2(kk + x1)
                   + psi2(kk + x2m) - psi2(kk + x1m))
    total += (c / alpha) * lead[None, :]
    total -= (c**3 / (3.0 * alpha**3)) * cubic[None, :]
    # sign fixed by the alpha = 2pi degenerate case: the periodized branch
    # telescopes to the constant +1 there, removing the spurious jump at the
    # diffracted front that the plane kernel cannot have
    return total / math.pi


def build_friedlander(alpha: float, y_min: float = -1.5, y_max: float = 4.5,
                      ny: int = 2400, nz: int = 768,
                      k_direct: int | None = None) -> FriedlanderGrid:
    """Sample G_alpha on a uniform grid and apply the half-derivative in y.

    The node y = 1 must land on the grid so the square-root cusp of the
    second branch starts exactly at a node.
    """
    check_cone_angle(alpha)
    if not (y_min < -1.0 < 1.0 < y_max):
        raise ValueError("y range must contain [-1, 1]")
    if k_direct is None:
        k_direct = max(24, math.ceil(200.0 / alpha))
    y = np.linspace(y_min, y_max, ny + 1)
    d = (y_max - y_min) / ny
    i1 = int(round((1.0 - y_min) / d))
    if abs(y[i1] - 1.0) > 1e-12:
        raise ValueError("grid spacing must place a node at y = 1")
    z = np.linspace(-0.5 * alpha, 0.5 * alpha, nz + 1)

    g = np.zeros((y.size, z.size))
    low = y < 1.0
    high = y > 1.0
    g[low] = _g_alpha_low(alpha, y[low], z)
    g[high] = _g_alpha_high(alpha, y[high], z, k_direct)
    # G is continuous at y = 1 (the arctan limits reproduce the translate
    # count); fill the node from the y < 1 branch
    g[i1] = _g_alpha_low(alpha, np.array([1.0]), z)[0]

    ag = GAMMA_HALF * l1_half_derivative(g, d)

    # periodic padding in z for clean bicubic interpolation near the seam
    pad = 3
    z_ext = np.concatenate([z[-1 - pad:-1] - alpha, z, z[1:1 + pad] + alpha])
    ag_ext = np.concatenate(
        [ag[:, -1 - pad:-1], ag, ag[:, 1:1 + pad]], axis=1)
    spline = RectBivariateSpline(y, z_ext, ag_ext, kx=3, ky=3, s=0)
    return FriedlanderGrid(alpha, y, z, g, ag, spline)


def friedlander_pullback(alpha: float, t: float, r1: float, r2: float,
                         theta1: float, theta2: float) -> tuple[float, float]:
    """(y, z) coordinates of a kernel query, z reduced to [-alpha/2, alpha/2)."""
    y = (t * t - r1 * r1 - r2 * r2) / (2.0 * r1 * r2)
    z = reduce_angle(alpha, theta1 - theta2)
    if z >= 0.5 * alpha:
        z -= alpha
    return y, z


def sine_kernel_friedlander(fg: FriedlanderGrid, q: KernelQuery) -> KernelValue:
    """Evaluate the Friedlander representation at a kernel query.

    Pullback through A2, bicubic interpolation of the half-derivated table,
    then the A3 factor.  Points with y < -1 are outside every front and
    return 0 exactly; y above the sampled range raises OutOfGrid.
    """
    r1, r2 = q.q1.r, q.q2.r
    y, z = friedlander_pullback(fg.alpha, q.t, r1, r2, q.q1.theta, q.q2.theta)
    direct, diffracted, _ = _fronts(fg.alpha, q)
    tol = 10.0 * q.h if q.h > 0 else FRONT_TOL
    region = classify_region(q.t, direct, diffracted, tol)
    if y < -1.0:
        return KernelValue(0.0, region)
    if y > fg.y[-1]:
        raise OutOfGrid(f"pullback y = {y:.3f} above grid maximum {fg.y[-1]}")
    raw = float(fg._spline.ev(y, z))
    return KernelValue(raw / (2.0 * math.pi * math.sqrt(2.0 * r1 * r2)), region)
