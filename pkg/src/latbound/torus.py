"""Torus geometry, uniform periodic grids and Haar-measure quadrature.

Points of the Brillouin zone are stored in the left-closed box
``[-pi, pi)^d``.  A :class:`QuadGrid` with ``n`` nodes per axis places its
nodes at ``-pi + 2*pi*j/n`` and gives every node the weight ``1/n**d``, so
the node sum is the periodic trapezoid rule for the normalized Haar
measure.  For even ``n`` both ``0`` and ``(pi, ..., pi)`` are nodes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import optimize

from .errors import EvaluationError, InvalidArgument

TWO_PI = 2.0 * np.pi
SUPPORTED_DIMS = (1, 2)


def wrap(raw) -> "TorusPoint":
    """Reduce coordinates modulo ``2*pi`` into ``[-pi, pi)``."""
    coords = np.atleast_1d(np.asarray(raw, dtype=float))
    if coords.ndim != 1:
        raise InvalidArgument(f"expected a flat coordinate list, got shape {coords.shape}")
    if not np.all(np.isfinite(coords)):
        raise InvalidArgument(f"non-finite torus coordinates: {coords.tolist()}")
    return TorusPoint(tuple(float(c) for c in wrap_array(coords)))


def wrap_array(x) -> np.ndarray:
    """Vectorized wrap into ``[-pi, pi)``; no validation."""
    out = np.mod(np.asarray(x, dtype=float) + np.pi, TWO_PI) - np.pi
    # np.mod can round up to exactly 2*pi for tiny negative arguments
    return np.where(out >= np.pi, out - TWO_PI, out)


@dataclass(frozen=True)
class TorusPoint:
    """A quasi-momentum on the torus, coordinates in ``[-pi, pi)``.

    Build instances with :func:`wrap` (or :meth:`of`); the constructor checks
    but does not reduce.
    """

    coords: tuple

    def __post_init__(self):
        if len(self.coords) not in SUPPORTED_DIMS:
            raise InvalidArgument(f"torus dimension must be 1 or 2, got {len(self.coords)}")
        for c in self.coords:
            if not (-np.pi <= c < np.pi):
                raise InvalidArgument(f"coordinate {c!r} outside [-pi, pi); use wrap()")

    @classmethod
    def of(cls, *coords) -> "TorusPoint":
        return wrap(coords)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype or float)

    def __neg__(self) -> "TorusPoint":
        return wrap([-c for c in self.coords])

    def __str__(self):
        return "(" + ", ".join(f"{c:.10g}" for c in self.coords) + ")"


def as_coords(point, dim: int) -> np.ndarray:
    """Coerce a scalar, sequence or :class:`TorusPoint` to a ``(dim,)`` array."""
    arr = np.asarray(point, dtype=float)
    if arr.ndim == 0:
        arr = np.full(dim, float(arr))
    if arr.shape != (dim,):
        raise InvalidArgument(f"expected a point with {dim} coordinates, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgument("non-finite torus coordinates")
    return wrap_array(arr)


def pi_point(dim: int) -> TorusPoint:
    """The corner ``(pi, ..., pi)``, stored as ``(-pi, ..., -pi)``."""
    return wrap([np.pi] * dim)


@dataclass(frozen=True)
class QuadGrid:
    """Uniform tensor grid on the d-torus carrying the normalized Haar measure."""

    dim: int
    n: int

    def __post_init__(self):
        if self.dim not in SUPPORTED_DIMS:
            raise InvalidArgument(f"grid dimension must be 1 or 2, got {self.dim}")
        if self.n < 8 or self.n % 2:
            raise InvalidArgument(f"nodes per axis must be even and >= 8, got {self.n}")

    @cached_property
    def axis(self) -> np.ndarray:
        return -np.pi + TWO_PI * np.arange(self.n) / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        """Node coordinates, shape ``(n**dim, dim)``, row-major over axes."""
        return np.array(list(itertools.product(self.axis, repeat=self.dim)))

    @property
    def size(self) -> int:
        return self.n**self.dim

    @property
    def weight(self) -> float:
        return 1.0 / self.size

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.size, self.weight)

    @property
    def spacing(self) -> float:
        return TWO_PI / self.n

    def index_of(self, point) -> int:
        """Flat index of the node equal to ``point``; raises if it is off-grid."""
        x = as_coords(point, self.dim)
        j = (x + np.pi) / self.spacing
        ji = np.rint(j).astype(int) % self.n
        if not np.allclose(self.axis[ji], x, atol=1e-12, rtol=0):
            raise InvalidArgument(f"point {x.tolist()} is not a node of {self}")
        return int(np.ravel_multi_index(tuple(ji), (self.n,) * self.dim))

    def negation_index(self) -> np.ndarray:
        """Permutation ``idx`` with ``nodes[idx[i]] == -nodes[i]`` (mod 2*pi)."""
        per_axis = (-np.arange(self.n)) % self.n
        grids = np.meshgrid(*([per_axis] * self.dim), indexing="ij")
        return np.ravel_multi_index(tuple(grids), (self.n,) * self.dim).ravel()

    def difference_index(self) -> np.ndarray:
        """Table ``D[c, a]`` = flat index of ``nodes[c] - nodes[a]``.

        With the left-closed node convention ``-pi + 2*pi*c/n``, the difference
        of nodes ``c`` and ``a`` is the node ``c - a + n/2`` (mod n) per axis.
        """
        n, d = self.n, self.dim
        multi = np.array(np.unravel_index(np.arange(self.size), (n,) * d))  # (d, N)
        diff = (multi[:, :, None] - multi[:, None, :] + n // 2) % n  # (d, N, N)
        return np.ravel_multi_index(tuple(diff), (n,) * d)


def quad_integrate(f: Callable[[np.ndarray], np.ndarray], grid: QuadGrid) -> float:
    """Integrate ``f`` against the normalized Haar measure on ``grid``.

    ``f`` is called once with the ``(N, d)`` node array and must return ``N``
    values.  The node sum is evaluated with :func:`math.fsum`, so the result
    is independent of node order (exact negation symmetry on even grids).
    """
    values = np.asarray(f(grid.nodes), dtype=float).reshape(-1)
    if values.shape != (grid.size,):
        raise InvalidArgument(f"integrand returned {values.shape}, expected ({grid.size},)")
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        node = grid.nodes[bad[0]]
        raise EvaluationError(f"integrand is not finite at node {node.tolist()}", node=node)
    return math.fsum(values) * grid.weight


def refine_extremum(func, x0, spacing: float, maximize: bool = False, tol: float = 1e-12):
    """Polish a grid-scan extremum of a smooth function on the torus.

    Searches the cell of half-width ``spacing`` around ``x0``.  Returns
    ``(x, value)``; never returns a point worse than ``x0``.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    sign = -1.0 if maximize else 1.0

    def obj(x):
        return sign * func(wrap_array(np.atleast_1d(x)))

    f0 = obj(x0)
    if x0.size == 1:
        res = optimize.minimize_scalar(
            lambda t: obj(np.array([t])),
            bounds=(x0[0] - spacing, x0[0] + spacing),
            method="bounded",
            options={"xatol": max(tol, 1e-14)},
        )
        x, fx = np.array([res.x]), res.fun
    else:
        simplex = np.vstack([x0] + [x0 + 0.5 * spacing * e for e in np.eye(x0.size)])
        res = optimize.minimize(
            obj, x0, method="Nelder-Mead",
            options={"initial_simplex": simplex, "xatol": max(tol, 1e-14),
                     "fatol": max(tol, 1e-15), "maxiter": 2000},
        )
        x, fx = res.x, res.fun
    if fx > f0:
        x, fx = x0, f0
    return wrap_array(x), sign * fx
