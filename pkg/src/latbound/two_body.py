"""Two-particle fiber operator ``h(k) = E2_k + mu * v`` (v = averaging operator).

Its only discrete eigenvalue ``e(k)`` is the root of the determinant

    det2(k, z) = 1 + mu * integral eta(dq) / (E2_k(q) - z)

outside the band ``[E2_min(k), E2_max(k)]``: above the band for ``mu > 0``,
below it for ``mu < 0``.  On that side ``det2`` is strictly monotone (its
derivative is ``mu * integral 1/(E2_k - z)**2``), so the root is unique.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .dispersion import Band, Coupling, band_two_body, node_energies_two_body, two_body_dispersion
from .errors import BracketError, InvalidArgument, PoleProximityError, SolverError
from .torus import QuadGrid, TorusPoint, as_coords, refine_extremum, wrap

log = logging.getLogger(__name__)

POLE_GAP = 1e-12
MAX_DOUBLINGS = 200


@dataclass(frozen=True)
class BoundState2:
    k: TorusPoint
    energy: float
    side: str  # "above-band" | "below-band"
    band: Band
    residual: float
    grid_n: int
    resolved: bool = True  # False if the quadrature root fell inside the continuous band

    @property
    def binding(self) -> float:
        """Distance from the band edge on the bound-state side (positive when resolved)."""
        if self.side == "above-band":
            return self.energy - self.band.hi
        return self.band.lo - self.energy


def _det2(energies: np.ndarray, z, mu: float, weight: float):
    return 1.0 + mu * weight * np.sum(1.0 / (energies - z), axis=-1)


def det2(k, z: float, cpl: Coupling, grid: QuadGrid) -> float:
    """Quadrature value of the two-body determinant at spectral parameter ``z``."""
    energies = node_energies_two_body(k, cpl.gamma, grid)
    gap = np.abs(energies - z)
    j = int(np.argmin(gap))
    if gap[j] < POLE_GAP:
        raise PoleProximityError(
            f"z={z!r} lies within {POLE_GAP} of the sampled band energy {energies[j]!r}",
            node=grid.nodes[j],
        )
    return float(_det2(energies, z, cpl.mu, grid.weight))


def _bracket(f, edge: float, direction: float, delta0: float, pole_edge: float):
    """Bracket the root of a determinant monotone on the bound-state side.

    ``direction`` is +1 (search above ``edge``) or -1 (below).  The
    determinant tends to 1 far away and to -inf at ``pole_edge``.
    """
    inner = edge + direction * delta0
    if f(inner) >= 0:
        # root between the nodes' extreme energy and inner
        near = pole_edge + direction * POLE_GAP * 10 * (1 + abs(pole_edge))
        if direction * (inner - near) <= 0:
            inner = edge + direction * 2 * delta0
        return near, inner
    prev, step = inner, delta0
    for _ in range(MAX_DOUBLINGS):
        step *= 2
        outer = edge + direction * step
        if f(outer) > 0:
            return prev, outer
        prev = outer
    raise BracketError(
        f"no sign change of the determinant within {step:g} of the band edge {edge:g}",
        bracket=(inner, prev),
    )


def solve_bound_state(k, cpl: Coupling, grid: QuadGrid, tol: float = 1e-12) -> BoundState2:
    """Unique eigenvalue ``e(k)`` of the two-body fiber operator.

    The root is bracketed outward from the band edge (initial offset
    ``max(1e-6, mu**2/(32 d))``, doubled until the sign changes) and refined
    with Brent's method to width ``tol``.  Degenerate (constant) fibers use
    the rank-one closed form ``E2 + mu``.
    """
    if tol <= 0:
        raise InvalidArgument("tol must be positive")
    kc = as_coords(k, grid.dim)
    mu = cpl.mu
    band = band_two_body(kc, cpl.gamma, grid)
    energies = node_energies_two_body(kc, cpl.gamma, grid)
    side = "above-band" if mu > 0 else "below-band"

    if band.degenerate:
        energy = 0.5 * (band.lo + band.hi) + mu
        residual = abs(float(_det2(energies, energy, mu, grid.weight)))
        return BoundState2(wrap(kc), energy, side, band, residual, grid.n, True)

    def f(z):
        return float(_det2(energies, z, mu, grid.weight))

    delta0 = max(1e-6, mu**2 / (32 * grid.dim))
    if mu > 0:
        edge, pole_edge, direction = max(band.hi, energies.max()), energies.max(), 1.0
    else:
        edge, pole_edge, direction = min(band.lo, energies.min()), energies.min(), -1.0
    a, b = _bracket(f, edge, direction, delta0, pole_edge)
    lo_z, hi_z = min(a, b), max(a, b)
    energy = optimize.brentq(f, lo_z, hi_z, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)

    far = energy + direction * 1e3 * (1 + abs(mu) + band.width)
    if f(far) <= 0:
        raise BracketError(f"second sign change of det2 beyond {energy!r}", bracket=(energy, far))

    resolved = energy > band.hi if mu > 0 else energy < band.lo
    if not resolved:
        log.info("bound state at k=%s not resolved by n=%d quadrature (e=%r, band=[%r, %r])",
                    kc, grid.n, energy, band.lo, band.hi)
    return BoundState2(wrap(kc), float(energy), side, band, abs(f(energy)), grid.n, resolved)


def solve_energies(ks, cpl: Coupling, grid: QuadGrid, tol: float = 1e-12) -> np.ndarray:
    """Vectorized ``e(k)`` for an ``(M, d)`` array of momenta (batched bisection).

    Same root as :func:`solve_bound_state`, bracketed from the extreme node
    energy rather than the refined band edge.
    """
    ks = np.asarray(ks, dtype=float).reshape(-1, grid.dim)
    mu, w = cpl.mu, grid.weight
    E = two_body_dispersion(ks[:, None, :], grid.nodes[None, :, :], cpl.gamma)
    direction = 1.0 if mu > 0 else -1.0
    edge = E.max(axis=1) if mu > 0 else E.min(axis=1)
    spread = E.max(axis=1) - E.min(axis=1)
    out = np.empty(len(ks))
    degenerate = spread <= 1e-12
    out[degenerate] = E[degenerate].mean(axis=1) + mu
    idx = np.flatnonzero(~degenerate)
    if idx.size == 0:
        return out
    E = E[idx]
    edge = edge[idx]

    def f(z):
        return 1.0 + mu * w * np.sum(1.0 / (E - z[:, None]), axis=1)

    near = edge + direction * POLE_GAP * 10 * (1 + np.abs(edge))
    step = np.full(idx.size, max(1e-6, mu**2 / (32 * grid.dim)))
    far = edge + direction * step
    for _ in range(MAX_DOUBLINGS):
        bad = f(far) <= 0
        if not bad.any():
            break
        step[bad] *= 2
        far[bad] = edge[bad] + direction * step[bad]
    else:
        raise BracketError("batched bracket expansion failed")
    # f(near) < 0 < f(far); bisection keeps that invariant
    a, b = near.copy(), far.copy()
    while np.max(np.abs(b - a)) > tol:
        m = 0.5 * (a + b)
        neg = f(m) <= 0
        a = np.where(neg, m, a)
        b = np.where(neg, b, m)
        if np.all(np.abs(b - a) <= 4 * np.finfo(float).eps * np.abs(m)):
            break
    out[idx] = 0.5 * (a + b)
    return out


def eigenfunction2(state: BoundState2, cpl: Coupling, grid: QuadGrid) -> np.ndarray:
    """Grid samples of ``mu*c / (e - E2_k(q))`` normalized to unit L2(eta) norm.

    ``c > 0``; the overall phase is conventional.  For a degenerate fiber the
    eigenvector is the constant function 1.
    """
    if not np.isfinite(state.residual) or state.residual > 1e-6:
        raise InvalidArgument(f"bound state residual {state.residual!r} too large")
    if state.band.degenerate:
        return np.ones(grid.size)
    energies = node_energies_two_body(state.k, cpl.gamma, grid)
    f = cpl.mu / (state.energy - energies)
    c = 1.0 / np.sqrt(grid.weight * np.sum(f * f))
    return c * f


def _points(k_grid, dim):
    if isinstance(k_grid, QuadGrid):
        return k_grid.nodes, k_grid.spacing
    pts = np.asarray(k_grid, dtype=float)
    pts = pts.reshape(-1, dim)
    if len(pts) == 0:
        raise InvalidArgument("empty momentum grid")
    per_axis = max(round(len(pts) ** (1.0 / dim)), 1)
    return pts, 2 * np.pi / per_axis


def dispersion_curve(cpl: Coupling, k_grid, grid: QuadGrid, tol: float = 1e-12) -> list:
    """One :class:`BoundState2` per momentum, in input order."""
    pts, _ = _points(k_grid, cpl.dim)
    states = []
    for k in pts:
        try:
            states.append(solve_bound_state(k, cpl, grid, tol))
        except Exception as exc:  # tag by momentum and re-raise
            raise SolverError(f"two-body solve failed at k={k.tolist()}: {exc}", momentum=k) from exc
    return states


def band_spectrum_h(cpl: Coupling, k_grid, grid: QuadGrid, tol: float = 1e-12) -> Band:
    """``[min_k e(k), max_k e(k)]`` from a sweep, polished around the extremal momenta."""
    pts, spacing = _points(k_grid, cpl.dim)
    states = dispersion_curve(cpl, pts, grid, tol)
    energies = np.array([s.energy for s in states])

    def e_of(k):
        return solve_bound_state(k, cpl, grid, tol).energy

    kmin, lo = refine_extremum(e_of, pts[np.argmin(energies)], spacing, maximize=False, tol=tol)
    kmax, hi = refine_extremum(e_of, pts[np.argmax(energies)], spacing, maximize=True, tol=tol)
    return Band(float(lo), float(hi), (wrap(kmin),), (wrap(kmax),))
