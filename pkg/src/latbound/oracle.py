"""Brute-force verification layer.

Dense discretizations of the fiber operators on a momentum grid, their
exact diagonalization, a position-space decay fit and the Pauli check.  This
module uses the torus and dispersion modules only; it never touches the
determinant or Birman-Schwinger code, so agreement with those is a genuine
cross-check.

Discretization: a grid function ``f`` is represented by its node values and
the L2(eta) inner product becomes ``sum w * f * g`` (two-body) or
``sum w**2 * f * g`` (three-body).  In the antisymmetric pair basis
``|ij> = (e_ij - e_ji)/sqrt(2)``, ``i < j``, the interaction
``f(p, q) -> int f(p, t) + int f(t, q)`` has matrix ``w * S S^T`` with
``S[ij, a] = delta_ai - delta_aj``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .dispersion import Coupling, node_energies_three_body, node_energies_two_body
from .errors import InvalidArgument, SizeLimitError
from .torus import QuadGrid

H2_LIMIT = 4096
H3_LIMIT = 11_000  # rows; ~1 GB per dense copy
PAULI_TOL = 1e-12


@dataclass
class DenseOperator:
    dim: int
    entries: np.ndarray = field(repr=False)
    basis: str
    pairs: np.ndarray | None = field(default=None, repr=False)
    _spectrum: np.ndarray | None = field(default=None, repr=False, compare=False)

    def eigenvalues(self) -> np.ndarray:
        """Full spectrum, ascending (computed once, then cached)."""
        if self._spectrum is None:
            self._spectrum = scipy.linalg.eigh(self.entries, eigvals_only=True, check_finite=False)
        return self._spectrum

    def extremal(self, which: str = "max") -> float:
        """Smallest (``"min"``) or largest (``"max"``) eigenvalue only."""
        if self._spectrum is not None:
            return float(self._spectrum[0 if which == "min" else -1])
        i = 0 if which == "min" else self.dim - 1
        w = scipy.linalg.eigh(self.entries, eigvals_only=True, subset_by_index=[i, i],
                              driver="evr", check_finite=False)
        return float(w[0])

    def extremal_pair(self, which: str = "max"):
        i = 0 if which == "min" else self.dim - 1
        w, v = scipy.linalg.eigh(self.entries, subset_by_index=[i, i], driver="evr",
                                 check_finite=False)
        return float(w[0]), v[:, 0]


def h_matrix(k, cpl: Coupling, grid: QuadGrid, limit: int = H2_LIMIT) -> DenseOperator:
    """Two-body fiber operator: ``diag(E2_k(q_i)) + mu * w * 1 1^T``."""
    if grid.size > limit:
        raise SizeLimitError(f"h-matrix of size {grid.size} exceeds limit {limit}")
    energies = node_energies_two_body(k, cpl.gamma, grid)
    H = np.full((grid.size, grid.size), cpl.mu * grid.weight)
    H[np.diag_indices_from(H)] += energies
    return DenseOperator(grid.size, H, "momentum-grid delta basis")


def pair_basis(grid: QuadGrid) -> np.ndarray:
    i, j = np.triu_indices(grid.size, 1)
    return np.stack([i, j], axis=1)


def H_matrix(K, cpl: Coupling, grid: QuadGrid, limit: int = H3_LIMIT) -> DenseOperator:
    """Three-body fiber operator on the antisymmetric pair basis ``i < j``."""
    N = grid.size
    m = N * (N - 1) // 2
    if m > limit:
        raise SizeLimitError(f"antisymmetric basis of dimension {m} exceeds limit {limit}")
    pairs = pair_basis(grid)
    assert len(pairs) == m
    S = np.zeros((m, N))
    rows = np.arange(m)
    S[rows, pairs[:, 0]] = 1.0
    S[rows, pairs[:, 1]] = -1.0
    H = S @ S.T
    del S
    H *= cpl.mu * grid.weight
    E3 = node_energies_three_body(K, cpl.gamma, grid)
    H[rows, rows] += E3[pairs[:, 0], pairs[:, 1]]
    return DenseOperator(m, H, "antisymmetric pairs (i<j), (e_ij - e_ji)/sqrt(2)", pairs)


def pairs_to_grid(v, grid: QuadGrid, pairs: np.ndarray | None = None) -> np.ndarray:
    """Antisymmetric node samples ``f[i, j]`` from a unit pair-basis vector.

    Scaled so that the L2(eta x eta) grid norm of ``f`` equals the Euclidean
    norm of ``v``.
    """
    if pairs is None:
        pairs = pair_basis(grid)
    v = np.asarray(v, dtype=float)
    f = np.zeros((grid.size, grid.size))
    val = v / (np.sqrt(2.0) * grid.weight)
    f[pairs[:, 0], pairs[:, 1]] = val
    f[pairs[:, 1], pairs[:, 0]] = -val
    return f


def apply_h(f, k, cpl: Coupling, grid: QuadGrid) -> np.ndarray:
    """Action of the discretized two-body operator on node samples."""
    f = np.asarray(f, dtype=float)
    energies = node_energies_two_body(k, cpl.gamma, grid)
    return energies * f + cpl.mu * grid.weight * np.sum(f)


def apply_H(f, K, cpl: Coupling, grid: QuadGrid) -> np.ndarray:
    """Action of the discretized three-body operator: kinetic term plus the two
    partial averages ``int f(p, t) dt + int f(t, q) dt``."""
    f = np.asarray(f, dtype=float)
    E3 = node_energies_three_body(K, cpl.gamma, grid)
    w = grid.weight
    rows = w * f.sum(axis=1)
    cols = w * f.sum(axis=0)
    return E3 * f + cpl.mu * (rows[:, None] + cols[None, :])


def grid_norm(f, grid: QuadGrid) -> float:
    f = np.asarray(f, dtype=float)
    return float(np.sqrt(grid.weight ** f.ndim * np.sum(f * f)))


def contact_amplitude(f, grid: QuadGrid) -> np.ndarray:
    """Fermion-fermion contact amplitude ``A(s) = int f(t, s - t) eta(dt)``.

    The on-site fermion-fermion interaction maps ``f`` to ``A(p + q)``, so
    ``A`` vanishing everywhere is the lattice Pauli principle.  No symmetry
    check here; see :func:`pauli_check`.
    """
    f = np.asarray(f, dtype=float)
    D = grid.difference_index()  # D[c, a] = index of s_c - t_a
    a = np.arange(grid.size)
    return grid.weight * np.sum(f[a[None, :], D], axis=1)


def pauli_check(f, grid: QuadGrid) -> float:
    """Largest contact amplitude of an antisymmetric grid function."""
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.size, grid.size):
        raise InvalidArgument(f"expected ({grid.size}, {grid.size}) samples, got {f.shape}")
    scale = max(float(np.max(np.abs(f))), np.finfo(float).tiny)
    if np.max(np.abs(f + f.T)) > 1e-14 * scale:
        raise InvalidArgument("input is not antisymmetric under exchange of the fermions")
    return float(np.max(np.abs(contact_amplitude(f, grid))))


def fermion_contact_matrix(grid: QuadGrid) -> np.ndarray:
    """Fermion-fermion contact interaction projected on the antisymmetric pair basis.

    Built column by column from :func:`contact_amplitude` (small grids only).
    """
    pairs = pair_basis(grid)
    m = len(pairs)
    D = grid.difference_index()
    # full-space action (V12 f)(p_a, p_b) = A(p_a + p_b); sum index of p_a + p_b:
    # p_a + p_b = s_c  <=>  s_c - p_a = p_b  <=>  D[c, a] == b
    sum_index = np.empty((grid.size, grid.size), dtype=int)
    for c in range(grid.size):
        sum_index[np.arange(grid.size), D[c]] = c
    out = np.zeros((m, m))
    for col in range(m):
        e = np.zeros(m)
        e[col] = 1.0
        f = pairs_to_grid(e, grid, pairs)
        g = contact_amplitude(f, grid)[sum_index]
        out[:, col] = (g[pairs[:, 0], pairs[:, 1]] - g[pairs[:, 1], pairs[:, 0]]) * grid.weight / np.sqrt(2.0)
    return out


@dataclass
class DecayReport:
    slope: float | None
    passed: bool | None
    skipped: bool
    threshold: float
    radii: np.ndarray = field(repr=False)
    profile: np.ndarray = field(repr=False)
    fit_range: tuple = ()
    reason: str = ""


def position_profile(f, grid: QuadGrid):
    """Radial maximum of ``|psi(x)|`` after a DFT of every momentum slot.

    Returns ``(radii, profile)`` with integer Euclidean radii ``0..rmax``.
    """
    f = np.asarray(f, dtype=float)
    slots = f.ndim
    shape = (grid.n,) * (grid.dim * slots)
    psi = np.abs(np.fft.ifftn(f.reshape(shape)))
    x = np.fft.fftfreq(grid.n, d=1.0 / grid.n)
    mesh = np.meshgrid(*([x] * len(shape)), indexing="ij")
    r = np.rint(np.sqrt(sum(m * m for m in mesh))).astype(int).ravel()
    prof = np.zeros(r.max() + 1)
    np.maximum.at(prof, r, psi.ravel())
    return np.arange(prof.size), prof


def decay_check(f, grid: QuadGrid, threshold: float = 0.1, norm_tol: float = 1e-8) -> DecayReport:
    """Fit ``log`` of the radial maximum of the position-space bound state.

    ``f`` holds node samples of a one-slot (two-body, shape ``(N,)``) or
    two-slot (three-body, shape ``(N, N)``) momentum function with unit grid
    norm.  The fit uses radii ``[max(2, n/16), n/4]`` (clipped where the
    profile drops below 1e-12 of its peak).  Passes if the slope is below
    ``-threshold`` per lattice site.
    """
    f = np.asarray(f, dtype=float)
    if f.shape not in ((grid.size,), (grid.size, grid.size)):
        raise InvalidArgument(f"unexpected sample shape {f.shape}")
    if grid.n & (grid.n - 1):
        raise InvalidArgument(f"decay check needs a power-of-two grid, got n={grid.n}")
    norm = grid_norm(f, grid)
    if abs(norm - 1.0) > norm_tol:
        raise InvalidArgument(f"input not normalized (grid norm {norm!r})")
    radii, prof = position_profile(f, grid)
    peak = prof.max()
    if np.all(prof[1:] <= 1e-10 * peak):
        return DecayReport(None, None, True, threshold, radii, prof,
                           reason="delta-like position profile (constant momentum function)")
    lo, hi = max(2, grid.n // 16), grid.n // 4
    sel = (radii >= lo) & (radii <= hi) & (prof > 1e-12 * peak)
    if sel.sum() < 3:
        return DecayReport(None, None, True, threshold, radii, prof,
                           reason="too few radii above the noise floor")
    slope = float(np.polyfit(radii[sel], np.log(prof[sel]), 1)[0])
    used = radii[sel]
    return DecayReport(slope, slope < -threshold, False, threshold, radii, prof,
                       (int(used.min()), int(used.max())))
