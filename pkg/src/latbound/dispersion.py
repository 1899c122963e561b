"""Lattice dispersion and the two- and three-body kinetic-energy surfaces.

    eps(p)          = 2 * sum_i (1 - cos p_i)
    E2_k(q)         = eps(q) + gamma * eps(k - q)
    E3_K(p, q)      = eps(p) + eps(q) + gamma * eps(K - p - q)

All three are sums of one-dimensional terms over the Cartesian axes, so band
extrema are found axis by axis: a grid scan followed by Newton steps on the
analytic gradient/Hessian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .torus import SUPPORTED_DIMS, QuadGrid, TorusPoint, as_coords, wrap, wrap_array

DEGENERATE_WIDTH = 1e-12


@dataclass(frozen=True)
class Coupling:
    """Physical parameters: coupling ``mu`` (nonzero), mass ratio ``gamma`` > 0, dimension."""

    mu: float
    gamma: float = 1.0
    dim: int = 1

    def __post_init__(self):
        if not np.isfinite(self.mu) or self.mu == 0:
            raise InvalidArgument(f"coupling mu must be finite and nonzero (mu != 0), got {self.mu!r}")
        if not np.isfinite(self.gamma) or self.gamma <= 0:
            raise InvalidArgument(f"mass ratio gamma must be > 0, got {self.gamma!r}")
        if self.dim not in SUPPORTED_DIMS:
            raise InvalidArgument(f"dimension must be 1 or 2, got {self.dim!r}")

    @property
    def repulsive(self) -> bool:
        return self.mu > 0


@dataclass(frozen=True)
class Band:
    """Closed energy interval ``[lo, hi]`` with the points where the ends are attained."""

    lo: float
    hi: float
    argmin: tuple = ()
    argmax: tuple = ()

    def __post_init__(self):
        if self.lo > self.hi:
            raise InvalidArgument(f"band with lo={self.lo} > hi={self.hi}")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def degenerate(self) -> bool:
        return self.width <= DEGENERATE_WIDTH

    def contains(self, e: float, margin: float = 0.0) -> bool:
        return self.lo - margin <= e <= self.hi + margin

    def distance(self, e: float) -> float:
        return max(self.lo - e, e - self.hi, 0.0)


def epsilon(p) -> np.ndarray:
    """Single-particle dispersion; ``p`` has the coordinates on its last axis."""
    p = np.asarray(p, dtype=float)
    return 2.0 * np.sum(1.0 - np.cos(p), axis=-1)


def two_body_dispersion(k, q, gamma: float) -> np.ndarray:
    """Kinetic energy of the pair at total quasi-momentum ``k`` as a function of ``q``."""
    k = np.asarray(k, dtype=float)
    q = np.asarray(q, dtype=float)
    return epsilon(q) + gamma * epsilon(k - q)


def three_body_dispersion(K, p, q, gamma: float) -> np.ndarray:
    """Kinetic energy of the trimer at total quasi-momentum ``K``.

    Exactly symmetric in ``(p, q)``: the third momentum is formed as
    ``K - (p + q)`` so swapping the arguments gives identical bits.
    """
    K = np.asarray(K, dtype=float)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return epsilon(p) + epsilon(q) + gamma * epsilon(K - (p + q))


# --- per-axis pieces -------------------------------------------------------

def _axis2(k, gamma):
    def f(x):
        return 2 * (1 - np.cos(x[0])) + 2 * gamma * (1 - np.cos(k - x[0]))

    def grad(x):
        return np.array([2 * np.sin(x[0]) - 2 * gamma * np.sin(k - x[0])])

    def hess(x):
        return np.array([[2 * np.cos(x[0]) + 2 * gamma * np.cos(k - x[0])]])

    return f, grad, hess


def _axis3(K, gamma):
    def f(x):
        p, q = x
        return 2 * (1 - np.cos(p)) + 2 * (1 - np.cos(q)) + 2 * gamma * (1 - np.cos(K - (p + q)))

    def grad(x):
        p, q = x
        s3 = 2 * gamma * np.sin(K - (p + q))
        return np.array([2 * np.sin(p) - s3, 2 * np.sin(q) - s3])

    def hess(x):
        p, q = x
        c3 = 2 * gamma * np.cos(K - (p + q))
        return np.array([[2 * np.cos(p) + c3, c3], [c3, 2 * np.cos(q) + c3]])

    return f, grad, hess


def _newton_polish(f, grad, hess, x, sign, tol, max_iter=50):
    """Newton iteration toward a local extremum (``sign=+1`` min, ``-1`` max)."""
    fx = f(x)
    for _ in range(max_iter):
        H = sign * hess(x)
        g = sign * grad(x)
        try:
            eig = np.linalg.eigvalsh(H)
        except np.linalg.LinAlgError:
            break
        if eig.min() <= 1e-14:
            break  # flat or wrong curvature: scan value stands
        step = -np.linalg.solve(H, g)
        x_new = x + step
        f_new = f(x_new)
        if sign * (f_new - fx) > 1e-15 * (1 + abs(fx)):
            break
        done = abs(f_new - fx) < tol and np.max(np.abs(step)) < np.sqrt(tol)
        x, fx = x_new, f_new
        if done:
            break
    return x, fx


def _axis_extremum(f, grad, hess, scan_axes, sign, tol):
    mesh = np.meshgrid(*scan_axes, indexing="ij")
    values = f(np.array(mesh))
    j = np.argmin(values) if sign > 0 else np.argmax(values)
    x0 = np.array([m.flat[j] for m in mesh])
    return _newton_polish(f, grad, hess, x0, sign, tol)


def _scan_axis(grid: QuadGrid) -> np.ndarray:
    n = max(grid.n, 64)
    return -np.pi + 2 * np.pi * np.arange(n) / n


def band_two_body(k, gamma: float, grid: QuadGrid, refine_tol: float = 1e-12) -> Band:
    """Range ``[E2_min(k), E2_max(k)]`` of the pair kinetic energy over the torus."""
    if refine_tol <= 0:
        raise InvalidArgument("refine_tol must be positive")
    k = as_coords(k, grid.dim)
    axis = _scan_axis(grid)
    lo = hi = 0.0
    qmin, qmax = [], []
    for ki in k:
        f, g, h = _axis2(ki, gamma)
        xmin, fmin = _axis_extremum(f, g, h, [axis], +1, refine_tol)
        xmax, fmax = _axis_extremum(f, g, h, [axis], -1, refine_tol)
        lo += fmin
        hi += fmax
        qmin.append(xmin[0])
        qmax.append(xmax[0])
    if hi < lo:  # constant fiber, rounding only
        lo = hi = 0.5 * (lo + hi)
    return Band(float(lo), float(hi), (wrap(qmin),), (wrap(qmax),))


def band_three_body(K, gamma: float, grid: QuadGrid, refine_tol: float = 1e-12) -> Band:
    """Range ``[E_min(K), E_max(K)]`` of the trimer kinetic energy over pairs ``(p, q)``."""
    if refine_tol <= 0:
        raise InvalidArgument("refine_tol must be positive")
    K = as_coords(K, grid.dim)
    axis = _scan_axis(grid)
    lo = hi = 0.0
    pmin, qmin, pmax, qmax = [], [], [], []
    for Ki in K:
        f, g, h = _axis3(Ki, gamma)
        xmin, fmin = _axis_extremum(f, g, h, [axis, axis], +1, refine_tol)
        xmax, fmax = _axis_extremum(f, g, h, [axis, axis], -1, refine_tol)
        lo += fmin
        hi += fmax
        pmin.append(xmin[0]); qmin.append(xmin[1])
        pmax.append(xmax[0]); qmax.append(xmax[1])
    if hi < lo:
        lo = hi = 0.5 * (lo + hi)
    return Band(float(lo), float(hi), (wrap(pmin), wrap(qmin)), (wrap(pmax), wrap(qmax)))


def channel_band(K, p, gamma: float, grid: QuadGrid, refine_tol: float = 1e-12) -> Band:
    """``[E_min(K, p), E_max(K, p)]``: the trimer energy with one fermion momentum frozen."""
    K = as_coords(K, grid.dim)
    p = as_coords(p, grid.dim)
    b = band_two_body(wrap_array(K - p), gamma, grid, refine_tol)
    shift = float(epsilon(p))
    return Band(b.lo + shift, b.hi + shift, b.argmin, b.argmax)


def node_energies_two_body(k, gamma: float, grid: QuadGrid) -> np.ndarray:
    """``E2_k`` sampled on the grid nodes (the poles of the discretized determinant)."""
    return two_body_dispersion(as_coords(k, grid.dim), grid.nodes, gamma)


def node_energies_three_body(K, gamma: float, grid: QuadGrid) -> np.ndarray:
    """Matrix ``E3_K(p_i, p_j)`` over all node pairs; exactly symmetric."""
    K = as_coords(K, grid.dim)
    P = grid.nodes
    return three_body_dispersion(K, P[:, None, :], P[None, :, :], gamma)


__all__ = [
    "Band",
    "Coupling",
    "TorusPoint",
    "band_three_body",
    "band_two_body",
    "channel_band",
    "epsilon",
    "node_energies_three_body",
    "node_energies_two_body",
    "three_body_dispersion",
    "two_body_dispersion",
]
