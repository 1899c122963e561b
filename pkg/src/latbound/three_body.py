"""Three-particle fiber operator ``H(K)`` (two identical fermions + one particle).

Essential spectrum
    the two-particle branch ``{Z(K, p) = e(K - p) + eps(p)}`` together with the
    kinetic band ``[E_min(K), E_max(K)]``.
Bound states
    zeros of the Fredholm determinant ``D(K, z) = det(I - L(K, z))`` of the
    Birman-Schwinger kernel

        L(K, z; p, q) = mu * Delta(K, p; z)**-1/2 * Delta(K, q; z)**-1/2 / (E3_K(p, q) - z)

    with the channel determinant ``Delta(K, p; z) = 1 + mu * int eta(dq) / (E3_K(p, q) - z)``,
    evaluated strictly outside the essential spectrum on the bound-state side
    (above ``tau_t`` for ``mu > 0``, below ``tau_b`` for ``mu < 0``).

The kernel is discretized by the Nystrom rule on the same grid used for the
quadrature, ``L[i, j] = mu * w * s_i * s_j / (E3[i, j] - z)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy import optimize

from . import oracle
from .dispersion import Band, Coupling, band_three_body, epsilon, node_energies_three_body, three_body_dispersion
from .errors import BoundStateNotFound, InvalidArgument, PoleProximityError, SideViolationError, SolverError
from .torus import QuadGrid, TorusPoint, as_coords, refine_extremum, wrap, wrap_array
from .two_body import POLE_GAP, solve_bound_state, solve_energies

log = logging.getLogger(__name__)

MAX_SPAN_DOUBLINGS = 6
EVEN_ZERO_TOL = 1e-8


@dataclass(frozen=True)
class EssentialSpectrumReport:
    K: TorusPoint
    three_body_band: Band
    two_body_branch: Band
    tau_b: float
    tau_t: float
    pieces: tuple  # disjoint closed intervals (lo, hi), increasing

    def threshold(self, mu: float) -> float:
        """Edge of the essential spectrum on the bound-state side."""
        return self.tau_t if mu > 0 else self.tau_b

    def distance(self, e: float) -> float:
        return min(max(lo - e, e - hi, 0.0) for lo, hi in self.pieces)


@dataclass(frozen=True)
class BoundState3:
    K: TorusPoint
    energy: float
    side: str  # "above-top" | "below-bottom"
    bs_eigenvector: np.ndarray = field(repr=False)
    residual: float
    grid_n: int
    all_energies: tuple = ()
    bs_eigenvalue: float = 1.0
    essential: EssentialSpectrumReport | None = field(default=None, repr=False)


def _merge(intervals):
    out = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return tuple(out)


def Z(K, p, cpl: Coupling, grid: QuadGrid, tol: float = 1e-12) -> float:
    """Two-particle branch ``e(K - p) + eps(p)``."""
    Kc = as_coords(K, grid.dim)
    pc = as_coords(p, grid.dim)
    return solve_bound_state(wrap_array(Kc - pc), cpl, grid, tol).energy + float(epsilon(pc))


def essential_spectrum(K, cpl: Coupling, grid: QuadGrid, tol: float = 1e-12,
                       scan_grid: QuadGrid | None = None) -> EssentialSpectrumReport:
    """Assemble the essential spectrum of ``H(K)``.

    The branch range is found by evaluating ``Z`` on the nodes of
    ``scan_grid`` (default: the quadrature grid) and polishing both ends.
    Because the node values are included, ``tau`` bounds ``Z`` at every
    quadrature node, which keeps every channel determinant positive beyond it.
    """
    Kc = as_coords(K, grid.dim)
    scan = scan_grid or grid
    pts = scan.nodes
    try:
        z_nodes = solve_energies(wrap_array(Kc - pts), cpl, grid, tol) + epsilon(pts)
        if scan is not grid:
            z_grid = solve_energies(wrap_array(Kc - grid.nodes), cpl, grid, tol) + epsilon(grid.nodes)
        else:
            z_grid = z_nodes
    except Exception as exc:
        raise SolverError(f"two-body branch failed at K={Kc.tolist()}: {exc}", momentum=Kc) from exc

    def z_of(p):
        return Z(Kc, p, cpl, grid, tol)

    pmin, zmin = refine_extremum(z_of, pts[np.argmin(z_nodes)], scan.spacing, False, tol)
    pmax, zmax = refine_extremum(z_of, pts[np.argmax(z_nodes)], scan.spacing, True, tol)
    zmin = min(zmin, z_grid.min())
    zmax = max(zmax, z_grid.max())
    branch = Band(float(zmin), float(zmax), (wrap(pmin),), (wrap(pmax),))
    band3 = band_three_body(Kc, cpl.gamma, grid)
    pieces = _merge([(branch.lo, branch.hi), (band3.lo, band3.hi)])
    return EssentialSpectrumReport(wrap(Kc), band3, branch, pieces[0][0], pieces[-1][1], pieces)


def channel_det(K, p, z: float, cpl: Coupling, grid: QuadGrid) -> float:
    """Channel determinant ``Delta(K, p; z)``."""
    Kc = as_coords(K, grid.dim)
    pc = as_coords(p, grid.dim)
    energies = three_body_dispersion(Kc, pc, grid.nodes, cpl.gamma)
    gap = np.abs(energies - z)
    j = int(np.argmin(gap))
    if gap[j] < POLE_GAP:
        raise PoleProximityError(f"z={z!r} within {POLE_GAP} of E3={energies[j]!r}", node=grid.nodes[j])
    return float(1.0 + cpl.mu * grid.weight * np.sum(1.0 / (energies - z)))


def _kernel(E3, z, mu, w):
    diff = E3 - z
    if np.min(np.abs(diff)) < POLE_GAP:
        raise PoleProximityError(f"z={z!r} lies on a sampled three-body energy")
    inv = 1.0 / diff
    dets = 1.0 + mu * w * inv.sum(axis=1)
    if np.any(dets <= 0):
        i = int(np.argmin(dets))
        raise SideViolationError(
            f"channel determinant {dets[i]!r} <= 0 at node {i}: z={z!r} is not beyond the essential spectrum")
    s = 1.0 / np.sqrt(dets)
    L = (mu * w) * np.outer(s, s) * inv
    return L, dets


def bs_matrix(K, z: float, cpl: Coupling, grid: QuadGrid) -> np.ndarray:
    """Nystrom matrix of the Birman-Schwinger operator (symmetric, ``N x N``)."""
    E3 = node_energies_three_body(K, cpl.gamma, grid)
    return _kernel(E3, z, cpl.mu, grid.weight)[0]


def _fredholm(E3, z, mu, w):
    L, _ = _kernel(E3, z, mu, w)
    A = -L
    A[np.diag_indices_from(A)] += 1.0
    sign, logdet = np.linalg.slogdet(A)
    return float(sign * np.exp(logdet))


def fredholm_det(K, z: float, cpl: Coupling, grid: QuadGrid) -> float:
    """``det(I - L(K, z))`` via LU factorization."""
    E3 = node_energies_three_body(K, cpl.gamma, grid)
    return _fredholm(E3, z, cpl.mu, grid.weight)


def _find_zeros(D, zs, values, tol):
    """Sign changes plus near-zero local minima of ``|D|`` on a sampled grid."""
    zeros = []
    for i in range(len(zs) - 1):
        a, b = zs[i], zs[i + 1]
        fa, fb = values[i], values[i + 1]
        if fa == 0:
            zeros.append(a)
        elif fa * fb < 0:
            lo, hi = min(a, b), max(a, b)
            zeros.append(optimize.brentq(D, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500))
    absv = np.abs(values)
    for i in range(1, len(zs) - 1):
        if absv[i] < absv[i - 1] and absv[i] < absv[i + 1] and values[i - 1] * values[i + 1] > 0:
            lo, hi = sorted((zs[i - 1], zs[i + 1]))
            res = optimize.minimize_scalar(lambda z: abs(D(z)), bounds=(lo, hi), method="bounded",
                                           options={"xatol": tol})
            if res.fun < EVEN_ZERO_TOL:
                log.info("even-order zero of the Fredholm determinant near z=%r", res.x)
                zeros.append(float(res.x))
    return zeros


def solve_three_body(K, cpl: Coupling, grid: QuadGrid, tol: float = 1e-11,
                     ess: EssentialSpectrumReport | None = None, n_scan: int = 48) -> BoundState3:
    """Bound-state energy ``E(K)`` beyond the essential spectrum.

    Scans ``D(K, z)`` on a geometric grid of offsets ``[delta, span]`` from
    the threshold (``delta = 1e-4 * (1 + |mu|)``, ``span = max(4|mu|, 1)``,
    doubled up to six times), refines every sign change by Brent's method
    and takes the zero farthest from the essential spectrum.  The
    Birman-Schwinger eigenvector for eigenvalue 1 is stored with the result.

    Raises :class:`BoundStateNotFound`, carrying the sampled values, when no
    zero is seen.
    """
    mu = cpl.mu
    Kc = as_coords(K, grid.dim)
    if ess is None:
        ess = essential_spectrum(Kc, cpl, grid, tol)
    direction = 1.0 if mu > 0 else -1.0
    tau = ess.threshold(mu)
    delta = 1e-4 * (1 + abs(mu))
    span = max(4 * abs(mu), 1.0)
    E3 = node_energies_three_body(Kc, cpl.gamma, grid)
    w = grid.weight

    def D(z):
        return _fredholm(E3, z, mu, w)

    offsets = np.geomspace(delta, span, n_scan)
    zs = list(tau + direction * offsets)
    values = [D(z) for z in zs]
    zeros = _find_zeros(D, zs, values, tol)
    doublings = 0
    while not zeros and doublings < MAX_SPAN_DOUBLINGS:
        new = np.geomspace(span, 2 * span, 9)[1:]
        span *= 2
        doublings += 1
        new_z = list(tau + direction * new)
        new_v = [D(z) for z in new_z]
        zeros = _find_zeros(D, [zs[-1]] + new_z, [values[-1]] + new_v, tol)
        zs += new_z
        values += new_v
    if not zeros:
        raise BoundStateNotFound(
            f"no zero of the Fredholm determinant within {span:g} beyond tau={tau!r} "
            f"(K={Kc.tolist()}, mu={mu}, gamma={cpl.gamma}, n={grid.n})",
            z=np.array(zs), values=np.array(values))

    zeros = sorted(set(zeros), key=lambda z: direction * z)
    energy = zeros[-1]
    L, _ = _kernel(E3, energy, mu, w)
    lam, vec = scipy.linalg.eigh(L)
    j = int(np.argmin(np.abs(lam - 1.0)))
    psi = vec[:, j]
    if psi[np.argmax(np.abs(psi))] < 0:
        psi = -psi
    side = "above-top" if mu > 0 else "below-bottom"
    return BoundState3(wrap(Kc), float(energy), side, psi, abs(D(energy)), grid.n,
                       tuple(float(z) for z in zeros), float(lam[j]), ess)


def _gap_fredholm(E3, z, mu, w):
    """``det(I - L)`` inside a gap of the essential spectrum.

    There every channel determinant is negative, and the similarity
    transform with ``|Delta|**-1/2`` gives the symmetric kernel
    ``-mu * w * s_i * s_j / (E3 - z)``.
    """
    diff = E3 - z
    if np.min(np.abs(diff)) < POLE_GAP:
        raise PoleProximityError(f"z={z!r} lies on a sampled three-body energy")
    inv = 1.0 / diff
    dets = 1.0 + mu * w * inv.sum(axis=1)
    if np.any(dets >= 0):
        raise SideViolationError(f"z={z!r}: channel determinants of mixed sign, not inside a spectral gap")
    s = 1.0 / np.sqrt(-dets)
    A = (mu * w) * np.outer(s, s) * inv
    A[np.diag_indices_from(A)] += 1.0
    sign, logdet = np.linalg.slogdet(A)
    return float(sign * np.exp(logdet))


def gap_states(K, cpl: Coupling, grid: QuadGrid, tol: float = 1e-11,
               ess: EssentialSpectrumReport | None = None, n_scan: int = 64) -> list:
    """Eigenvalues lying in gaps between the pieces of the essential spectrum.

    Not part of the existence statement (which concerns the region beyond
    ``tau``), but needed to classify every discrete eigenvalue of the dense
    oracle.  Each gap interior is scanned uniformly, ``delta`` away from
    both edges, with the sign-definite kernel of :func:`_gap_fredholm`.
    """
    Kc = as_coords(K, grid.dim)
    if ess is None:
        ess = essential_spectrum(Kc, cpl, grid, tol)
    E3 = node_energies_three_body(Kc, cpl.gamma, grid)
    delta = 1e-4 * (1 + abs(cpl.mu))
    found = []
    for (_, a), (b, _) in zip(ess.pieces[:-1], ess.pieces[1:]):
        if b - a <= 2 * delta:
            continue
        zs = list(np.linspace(a + delta, b - delta, n_scan))

        def D(z):
            return _gap_fredholm(E3, z, cpl.mu, grid.weight)

        try:
            values = [D(z) for z in zs]
        except SideViolationError:
            log.info("gap (%r, %r) not sign-definite on this grid; skipped", a, b)
            continue
        found += _find_zeros(D, zs, values, tol)
    return sorted(found)


def eigenfunction3(state: BoundState3, cpl: Coupling, grid: QuadGrid) -> np.ndarray:
    """Antisymmetric trimer wavefunction on node pairs, unit L2 grid norm.

    ``f(p, q) = mu * c * (phi(p) - phi(q)) / (E - E3_K(p, q))`` with
    ``phi = Delta**-1/2 * psi``.  Antisymmetry and ``f(p, p) = 0`` hold
    bit for bit.
    """
    if not np.isfinite(state.residual):
        raise InvalidArgument("bound state has a non-finite residual")
    E3 = node_energies_three_body(state.K, cpl.gamma, grid)
    _, dets = _kernel(E3, state.energy, cpl.mu, grid.weight)
    phi = state.bs_eigenvector / np.sqrt(dets)
    f = (cpl.mu / (state.energy - E3)) * (phi[:, None] - phi[None, :])
    c = 1.0 / np.sqrt(grid.weight**2 * np.sum(f * f))
    return c * f


def band_spectrum_H(cpl: Coupling, K_points, grid: QuadGrid, tol: float = 1e-11) -> tuple:
    """``([min_K E, max_K E], states)`` over a sweep of total momenta."""
    pts = K_points.nodes if isinstance(K_points, QuadGrid) else np.asarray(K_points, dtype=float).reshape(-1, cpl.dim)
    states = []
    for K in pts:
        try:
            states.append(solve_three_body(K, cpl, grid, tol))
        except Exception as exc:
            raise SolverError(f"three-body solve failed at K={K.tolist()}: {exc}", momentum=K) from exc
    energies = np.array([s.energy for s in states])
    band = Band(float(energies.min()), float(energies.max()),
                (states[int(np.argmin(energies))].K,), (states[int(np.argmax(energies))].K,))
    return band, states


@dataclass(frozen=True)
class SideCheck:
    passed: bool
    margin: float
    extreme_eigenvalue: float
    bound: float

    def __bool__(self):
        return self.passed


def wrong_side_check(K, cpl: Coupling, grid: QuadGrid, tol: float = 1e-10, dense=None) -> SideCheck:
    """No eigenvalue on the wrong side of the kinetic band.

    For ``mu > 0`` the quadratic form of ``H(K)`` dominates the kinetic term,
    so the dense oracle's smallest eigenvalue must be ``>= E_min(K) - tol``;
    for ``mu < 0`` the largest must be ``<= E_max(K) + tol``.  A prebuilt
    ``dense`` operator for the same ``(K, cpl, grid)`` may be passed in.
    """
    band3 = band_three_body(K, cpl.gamma, grid)
    H = dense if dense is not None else oracle.H_matrix(K, cpl, grid)
    if cpl.mu > 0:
        lam = H.extremal("min")
        margin = lam - band3.lo
        bound = band3.lo
    else:
        lam = H.extremal("max")
        margin = band3.hi - lam
        bound = band3.hi
    return SideCheck(margin >= -tol, float(margin), float(lam), float(bound))
