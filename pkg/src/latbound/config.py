"""Run configuration for the command-line front end.

A :class:`RunConfig` is validated against the :class:`~latbound.dispersion.Coupling`
invariants before anything is computed and is serialized into the header of
every output file, so any output can be fed back through ``--config`` to
reproduce it.
"""

from __future__ import annotations

import ast
import json
import math
import operator
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .dispersion import Coupling
from .errors import InvalidArgument

# One table for every default; the README mirrors it.
DEFAULTS = {
    "n": {1: 256, 2: 48},            # quadrature nodes per axis
    "n_three": {1: 256, 2: 12},      # three-body kernel grid (N^d x N^d matrix)
    "tol": 1e-12,                    # two-body root width
    "tol_three": 1e-11,              # three-body root width
    "sweep": {1: 64, 2: 8},          # per-axis sweep count when a sweep is requested
    "verify_n3": {1: 64, 2: 12},     # dense three-body oracle grid in the verify suite
    "verify_coverage_n": 32,         # essential-spectrum coverage grid (d=1)
    "span_factor": 4.0,              # initial three-body search span = max(4|mu|, 1)
    "span_doublings": 6,
    "delta_factor": 1e-4,            # offset from tau = 1e-4 * (1 + |mu|)
}

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv,
        ast.USub: operator.neg, ast.UAdd: operator.pos}


def parse_angle(text: str) -> float:
    """Evaluate a momentum coordinate like ``0.5``, ``pi``, ``-pi/2`` or ``3*pi/4``."""

    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise InvalidArgument(f"cannot parse momentum coordinate {text!r}")

    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise InvalidArgument(f"cannot parse momentum coordinate {text!r}") from exc
    try:
        value = ev(tree.body)
    except ZeroDivisionError as exc:
        raise InvalidArgument(f"division by zero in {text!r}") from exc
    if not math.isfinite(value):
        raise InvalidArgument(f"non-finite momentum coordinate {text!r}")
    return value


def parse_points(text: str, dim: int) -> list:
    """Comma-separated coordinates grouped into ``dim``-tuples."""
    vals = [parse_angle(t) for t in text.split(",") if t.strip()]
    if not vals or len(vals) % dim:
        raise InvalidArgument(f"need a multiple of {dim} coordinates, got {len(vals)} in {text!r}")
    return [tuple(vals[i:i + dim]) for i in range(0, len(vals), dim)]


def sweep_points(count: int, dim: int) -> list:
    """Uniform ``count``-per-axis sweep with values ``-pi + 2*pi*j/count``."""
    if count < 1:
        raise InvalidArgument("sweep count must be >= 1")
    axis = -math.pi + 2 * math.pi * np.arange(count) / count
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return [tuple(float(m.flat[i]) for m in mesh) for i in range(count**dim)]


@dataclass
class RunConfig:
    command: str = "two-body"
    dim: int = 1
    mu: float | None = None
    gamma: float = 1.0
    points: str | None = None  # raw --k/--K text
    sweep: int | None = None
    n: int | None = None
    tol: float | None = None
    out: str | None = None
    format: str = "csv"
    eigenfunction: bool = False

    def coupling(self) -> Coupling:
        if self.mu is None:
            raise InvalidArgument("--mu is required")
        return Coupling(float(self.mu), float(self.gamma), int(self.dim))

    def validate(self) -> "RunConfig":
        if self.dim not in (1, 2):
            raise InvalidArgument(f"--dim must be 1 or 2, got {self.dim}")
        if self.command != "verify" or self.mu is not None:
            self.coupling()
        elif not (math.isfinite(self.gamma) and self.gamma > 0):
            raise InvalidArgument(f"mass ratio gamma must be > 0, got {self.gamma!r}")
        if self.n is not None and (self.n < 8 or self.n % 2):
            raise InvalidArgument(f"--n must be even and >= 8, got {self.n}")
        if self.tol is not None and not self.tol > 0:
            raise InvalidArgument("--tol must be positive")
        if self.format not in ("csv", "json"):
            raise InvalidArgument(f"unknown format {self.format!r}")
        if self.eigenfunction and self.format != "json":
            raise InvalidArgument("--eigenfunction needs --format json")
        if self.points is not None and self.sweep is not None:
            raise InvalidArgument("give either explicit momenta or a sweep, not both")
        if self.points is not None:
            parse_points(self.points, self.dim)
        return self

    def momenta(self, default_sweep: bool = False) -> list:
        if self.points is not None:
            return parse_points(self.points, self.dim)
        if self.sweep is not None:
            return sweep_points(self.sweep, self.dim)
        if default_sweep:
            return sweep_points(DEFAULTS["sweep"][self.dim], self.dim)
        return [(0.0,) * self.dim]

    def quad_n(self, three: bool = False) -> int:
        if self.n is not None:
            return self.n
        return DEFAULTS["n_three" if three else "n"][self.dim]

    def root_tol(self, three: bool = False) -> float:
        if self.tol is not None:
            return self.tol
        return DEFAULTS["tol_three" if three else "tol"]

    def as_dict(self) -> dict:
        return asdict(self)

    def header_lines(self) -> list:
        """``key = value`` lines; floats use ``repr`` so they round-trip exactly."""
        out = []
        for key, value in asdict(self).items():
            if key == "out" or value is None:
                continue
            out.append(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")
        return out


_TYPES = {"dim": int, "mu": float, "gamma": float, "points": str, "sweep": int, "n": int, "tol": float,
          "out": str, "format": str, "command": str, "eigenfunction": lambda s: s.strip().lower() in ("1", "true", "yes")}


def _coerce(key, raw):
    if key not in _TYPES:
        raise InvalidArgument(f"unknown config key {key!r}")
    try:
        return _TYPES[key](raw.strip())
    except ValueError as exc:
        raise InvalidArgument(f"bad value for {key}: {raw!r}") from exc


def read_config_file(path) -> dict:
    """Flat ``key = value`` text, a CSV output (``#@`` header lines) or a JSON output."""
    path = Path(path)
    text = path.read_text()
    if text.lstrip().startswith("{"):
        data = json.loads(text).get("config", {})
        return {k: v for k, v in data.items() if k in _TYPES and v is not None and k != "out"}
    lines = text.splitlines()
    if any(line.startswith("#@") for line in lines):
        lines = [line[2:] for line in lines if line.startswith("#@")]
    values = {}
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidArgument(f"config line without '=': {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        values[key] = _coerce(key, raw)
    return values


FIELD_NAMES = tuple(f.name for f in fields(RunConfig))
