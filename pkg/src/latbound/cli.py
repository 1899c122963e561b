"""Command-line front end.

    latbound two-body     --dim 1 --mu -1 --k 0
    latbound three-body   --dim 1 --mu 4 --gamma 4 --K-sweep 32
    latbound ess-spectrum --mu 1 --K 0,pi/2,pi
    latbound band         --mu 1 --k-sweep 64
    latbound verify       --dim 1

Every output starts with the run configuration (``#@ key = value`` lines in
CSV, a ``config`` object in JSON).  Passing an output file back through
``--config`` reproduces it.  Exit status is 0 iff no row carries an error
(for ``verify``: iff no check failed).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time

import numpy as np

from . import oracle
from .config import DEFAULTS, RunConfig, read_config_file, sweep_points
from .dispersion import Coupling
from .errors import BoundStateNotFound, InvalidArgument
from .three_body import (band_spectrum_H, eigenfunction3, essential_spectrum, gap_states, solve_three_body,
                         wrong_side_check)
from .torus import QuadGrid, pi_point
from .two_body import band_spectrum_h, eigenfunction2, solve_bound_state

log = logging.getLogger("latbound")


def _fmt_point(p) -> str:
    return ";".join(repr(float(c)) for c in np.asarray(p, dtype=float).ravel())


def _fmt_list(values) -> str:
    return ";".join(repr(float(v)) for v in values)


def _fmt_pieces(pieces) -> str:
    return ";".join(f"[{lo!r},{hi!r}]" for lo, hi in pieces)


# --- subcommands -------------------------------------------------------------

TWO_BODY_COLUMNS = ["k", "energy", "band_lo", "band_hi", "side", "binding", "residual", "resolved", "grid_n", "error"]


def cmd_two_body(cfg: RunConfig):
    cpl = cfg.coupling()
    grid = QuadGrid(cfg.dim, cfg.quad_n())
    rows = []
    for k in cfg.momenta():
        row = {"k": k}
        try:
            s = solve_bound_state(k, cpl, grid, cfg.root_tol())
            row.update(energy=s.energy, band_lo=s.band.lo, band_hi=s.band.hi, side=s.side,
                       binding=s.binding, residual=s.residual, resolved=s.resolved, grid_n=s.grid_n)
        except Exception as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    good = [r for r in rows if "error" not in r]
    summary = {}
    if len(good) > 1:
        e = [r["energy"] for r in good]
        summary = {"min_energy": min(e), "argmin_k": good[int(np.argmin(e))]["k"],
                   "max_energy": max(e), "argmax_k": good[int(np.argmax(e))]["k"]}
    return TWO_BODY_COLUMNS, rows, summary


THREE_BODY_COLUMNS = ["K", "energy", "side", "tau_b", "tau_t", "band3_lo", "band3_hi", "branch_lo", "branch_hi",
                      "pieces", "all_energies", "gap_energies", "residual", "bs_eigenvalue", "grid_n", "error", "diagnostic"]


def _ess_fields(ess):
    return dict(tau_b=ess.tau_b, tau_t=ess.tau_t, band3_lo=ess.three_body_band.lo, band3_hi=ess.three_body_band.hi,
                branch_lo=ess.two_body_branch.lo, branch_hi=ess.two_body_branch.hi, pieces=ess.pieces)


def cmd_three_body(cfg: RunConfig):
    cpl = cfg.coupling()
    grid = QuadGrid(cfg.dim, cfg.quad_n(three=True))
    tol = cfg.root_tol(three=True)
    rows = []
    for K in cfg.momenta():
        row = {"K": K}
        try:
            ess = essential_spectrum(K, cpl, grid, tol)
            row.update(_ess_fields(ess))
            row["gap_energies"] = tuple(gap_states(K, cpl, grid, tol, ess=ess))
            s = solve_three_body(K, cpl, grid, tol, ess=ess)
            row.update(energy=s.energy, side=s.side, all_energies=s.all_energies, residual=s.residual,
                       bs_eigenvalue=s.bs_eigenvalue, grid_n=s.grid_n)
            if cfg.eigenfunction:
                row["eigenfunction"] = eigenfunction3(s, cpl, grid).tolist()
        except BoundStateNotFound as exc:
            row["error"] = f"BoundStateNotFound: {exc}"
            row["diagnostic"] = {"z": exc.z.tolist(), "D": exc.values.tolist()}
        except Exception as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    good = [r for r in rows if "error" not in r]
    summary = {}
    if len(good) > 1:
        e = [r["energy"] for r in good]
        summary = {"band_lo": min(e), "band_hi": max(e),
                   "argmin_K": good[int(np.argmin(e))]["K"], "argmax_K": good[int(np.argmax(e))]["K"]}
    return THREE_BODY_COLUMNS, rows, summary


ESS_COLUMNS = ["K", "tau_b", "tau_t", "band3_lo", "band3_hi", "branch_lo", "branch_hi", "pieces", "error"]


def cmd_ess_spectrum(cfg: RunConfig):
    cpl = cfg.coupling()
    grid = QuadGrid(cfg.dim, cfg.quad_n())
    rows = []
    for K in cfg.momenta():
        row = {"K": K}
        try:
            row.update(_ess_fields(essential_spectrum(K, cpl, grid, cfg.root_tol())))
        except Exception as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return ESS_COLUMNS, rows, {}


BAND_COLUMNS = ["operator", "lo", "hi", "argmin", "argmax", "points", "error"]


def cmd_band(cfg: RunConfig):
    cpl = cfg.coupling()
    pts = cfg.momenta(default_sweep=True)
    rows = []
    row = {"operator": "two-body", "points": len(pts)}
    try:
        b = band_spectrum_h(cpl, pts, QuadGrid(cfg.dim, cfg.quad_n()), cfg.root_tol())
        row.update(lo=b.lo, hi=b.hi, argmin=b.argmin[0], argmax=b.argmax[0])
    except Exception as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    rows.append(row)
    row = {"operator": "three-body", "points": len(pts)}
    try:
        b, _ = band_spectrum_H(cpl, pts, QuadGrid(cfg.dim, cfg.quad_n(three=True)), cfg.root_tol(three=True))
        row.update(lo=b.lo, hi=b.hi, argmin=b.argmin[0], argmax=b.argmax[0])
    except Exception as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    rows.append(row)
    return BAND_COLUMNS, rows, {}


# --- verify -----------------------------------------------------------------

VERIFY_COLUMNS = ["check", "mu", "momentum", "passed", "value", "bound", "detail", "error"]


def _check(rows, name, mu, momentum, passed, value=None, bound=None, detail=""):
    rows.append({"check": name, "mu": mu, "momentum": momentum, "passed": passed,
                 "value": value, "bound": bound, "detail": detail})


def run_verify(cfg: RunConfig) -> list:
    """Oracle cross-checks for both signs of the coupling; see the README for the list."""
    d = cfg.dim
    gamma = cfg.gamma
    mag = abs(cfg.mu) if cfg.mu is not None else 1.0
    grid2 = QuadGrid(d, DEFAULTS["n"][d])
    n3 = cfg.n if cfg.n is not None else DEFAULTS["verify_n3"][d]
    grid3 = QuadGrid(d, n3)
    zero = (0.0,) * d
    corner = tuple(pi_point(d).coords)
    rows: list = []

    for mu in (mag, -mag):
        cpl = Coupling(mu, gamma, d)
        sign = 1.0 if mu > 0 else -1.0

        if d == 1 and gamma == 1.0:
            e = solve_bound_state(0.0, cpl, grid2).energy
            exact = 4 + sign * math.sqrt(16 + mu * mu)
            _check(rows, "two-body closed form", mu, zero, abs(e - exact) < 1e-8, abs(e - exact), 1e-8)
        if gamma == 1.0:
            e = solve_bound_state(corner, cpl, grid2).energy
            err = abs(e - (4 * d + mu))
            _check(rows, "degenerate fiber", mu, corner, err <= 1e-12, err, 1e-12)

        for k in (zero, (math.pi / 2,) * d):
            e = solve_bound_state(k, cpl, grid2).energy
            lam = oracle.h_matrix(k, cpl, grid2).extremal("max" if mu > 0 else "min")
            _check(rows, "two-body det vs dense", mu, k, abs(e - lam) < 1e-8, abs(e - lam), 1e-8)

        pts = sweep_points(DEFAULTS["sweep"][d], d)
        states = [solve_bound_state(k, cpl, grid2) for k in pts]
        side_ok = all(sign * (s.energy - (s.band.hi if mu > 0 else s.band.lo)) > 0 for s in states)
        energies = np.array([s.energy for s in states])
        ext = pts[int(np.argmax(sign * energies))]
        _check(rows, "two-body side and extremum at k=0", mu, ext,
               side_ok and np.allclose(ext, 0.0), None, None,
               f"side ok: {side_ok}; extremal sweep point {ext}")

        ess_by_K = {}
        for K in (zero, (math.pi / 2,) * d, corner):
            ess = essential_spectrum(K, cpl, grid2)
            ess_by_K[K] = ess
            if mu > 0:
                margin = ess.tau_t - ess.three_body_band.hi
            else:
                margin = ess.three_body_band.lo - ess.tau_b
            # d=2 pair binding is exponentially small near the band edge: positivity only
            need = 1e-3 if d == 1 else 0.0
            _check(rows, "tau beyond kinetic band", mu, K, margin > need, margin, need)

        H = oracle.H_matrix(zero, cpl, grid3)
        evs = H.eigenvalues()
        for K, dense in ((zero, H), (corner, None)):
            sc = wrong_side_check(K, cpl, grid3, tol=1e-10, dense=dense)
            _check(rows, "wrong-side exclusion", mu, K, sc.passed, sc.margin, -1e-10)

        if d == 1:
            gcov = QuadGrid(1, DEFAULTS["verify_coverage_n"])
            ess = essential_spectrum(zero, cpl, gcov)
            evs = oracle.H_matrix(zero, cpl, gcov).eigenvalues()
            isolated = _isolated(zero, cpl, gcov, ess, evs)
            rest = np.delete(evs, isolated)
            worst = max((ess.distance(e) for e in rest), default=0.0)
            _check(rows, "essential-spectrum coverage", mu, zero, worst <= 0.1, worst, 0.1,
                   f"n={gcov.n}, {len(isolated)} isolated")

        ess3 = essential_spectrum(zero, cpl, grid3)
        tau = ess3.threshold(mu)
        delta = DEFAULTS["delta_factor"] * (1 + abs(mu))
        beyond = np.sort(evs[sign * (evs - tau) > delta])
        try:
            st = solve_three_body(zero, cpl, grid3, ess=ess3)
            zeros = np.sort(np.array(st.all_energies))
        except BoundStateNotFound:
            st, zeros = None, np.array([])
        same = len(beyond) == len(zeros) and (len(zeros) == 0 or np.max(np.abs(beyond - zeros)) < 1e-8)
        gap = float(np.max(np.abs(beyond - zeros))) if same and len(zeros) else 0.0
        _check(rows, "three-body det zeros vs dense", mu, zero, bool(same), gap, 1e-8,
               f"n={n3}: {len(zeros)} determinant zeros, {len(beyond)} dense eigenvalues beyond tau={tau!r}")
        _check(rows, "trimer beyond essential spectrum (info)", mu, zero, None,
               None if st is None else st.energy, tau,
               "none found" if st is None else f"E={st.energy!r}")

        lam, vec = H.extremal_pair("max" if mu > 0 else "min")
        f = oracle.pairs_to_grid(vec, grid3, H.pairs)
        viol = oracle.pauli_check(f, grid3)
        _check(rows, "Pauli contact amplitude (dense eigenvector)", mu, zero, viol < 1e-12, viol, 1e-12)
        if st is not None:
            f3 = eigenfunction3(st, cpl, grid3)
            viol = oracle.pauli_check(f3, grid3)
            _check(rows, "Pauli contact amplitude (trimer)", mu, zero, viol < 1e-12, viol, 1e-12)
            r = oracle.apply_H(f3, zero, cpl, grid3) - st.energy * f3
            res = oracle.grid_norm(r, grid3)
            _check(rows, "trimer eigen-residual", mu, zero, res < 1e-6, res, 1e-6)

        s2 = solve_bound_state(zero, cpl, grid2)
        rep = oracle.decay_check(eigenfunction2(s2, cpl, grid2), grid2) if grid2.n & (grid2.n - 1) == 0 else None
        if rep is None or rep.skipped:
            _check(rows, "two-body exponential decay", mu, zero, None, None, None,
                   "skipped: " + ("grid not a power of two" if rep is None else rep.reason))
        else:
            _check(rows, "two-body exponential decay", mu, zero, bool(rep.passed), rep.slope, -rep.threshold)
    return rows


def _isolated(K, cpl, grid, ess, evs):
    """Indices of dense eigenvalues matched (to 1e-8) by determinant zeros
    beyond the threshold or inside gaps of the essential spectrum."""
    try:
        zeros = list(solve_three_body(K, cpl, grid, ess=ess).all_energies)
    except BoundStateNotFound:
        zeros = []
    zeros += gap_states(K, cpl, grid, ess=ess)
    out = set()
    for z in zeros:
        j = int(np.argmin(np.abs(evs - z)))
        if abs(evs[j] - z) < 1e-8:
            out.add(j)
    return sorted(out)


def cmd_verify(cfg: RunConfig):
    return VERIFY_COLUMNS, run_verify(cfg), {}


COMMANDS = {"two-body": cmd_two_body, "three-body": cmd_three_body, "ess-spectrum": cmd_ess_spectrum,
            "band": cmd_band, "verify": cmd_verify}


# --- output -----------------------------------------------------------------

def _cell(value):
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        value = value.item()
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple) and value and isinstance(value[0], tuple):
        return _fmt_pieces(value)
    if isinstance(value, (tuple, list, np.ndarray)) or hasattr(value, "coords"):
        return _fmt_point(getattr(value, "coords", value))
    if isinstance(value, dict):
        return json.dumps(value)
    return str(value)


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if hasattr(value, "coords"):
        return list(value.coords)
    if isinstance(value, (tuple, list)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def render(cfg: RunConfig, columns, rows, summary) -> str:
    if cfg.format == "json":
        config = {k: v for k, v in cfg.as_dict().items() if k != "out"}
        doc = {"config": config, "results": _jsonable(rows), "summary": _jsonable(summary)}
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    for line in cfg.header_lines():
        buf.write(f"#@ {line}\n")
    buf.write("# columns: " + ", ".join(columns) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    for key, value in summary.items():
        buf.write(f"# summary {key} = {_cell(value)}\n")
    return buf.getvalue()


def _failed(command, rows) -> bool:
    if command == "verify":
        return any(r.get("passed") is False or "error" in r for r in rows)
    return any("error" in r for r in rows)


# --- argument parsing ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latbound", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key = value file, or a previous output file")
        p.add_argument("--dim", type=int, choices=(1, 2))
        p.add_argument("--mu", type=float, help="coupling, nonzero")
        p.add_argument("--gamma", type=float, help="mass ratio, > 0")
        p.add_argument("--k", "--K", dest="points", help="comma-separated coordinates, e.g. 0,pi/2")
        p.add_argument("--k-sweep", "--K-sweep", dest="sweep", type=int, help="sweep points per axis")
        p.add_argument("--n", type=int, help="quadrature nodes per axis")
        p.add_argument("--tol", type=float)
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"))
        if name == "three-body":
            p.add_argument("--eigenfunction", action="store_true", default=None,
                           help="include eigenfunction samples (json only)")
    return parser


def make_config(args) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    for key in ("dim", "mu", "gamma", "points", "sweep", "n", "tol", "out", "format", "eigenfunction"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    values["command"] = args.command
    return RunConfig(**values).validate()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = make_config(args)
    except (InvalidArgument, OSError) as exc:
        parser.error(str(exc))
    if cfg.command == "verify" and cfg.dim == 2 and cfg.n is None:
        log.info("d=2 verify uses the capped dense oracle grid n=%d", DEFAULTS["verify_n3"][2])
    t0 = time.perf_counter()
    columns, rows, summary = COMMANDS[cfg.command](cfg)
    text = render(cfg, columns, rows, summary)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    log.info("%s finished in %.2f s", cfg.command, time.perf_counter() - t0)
    return 1 if _failed(cfg.command, rows) else 0


if __name__ == "__main__":
    sys.exit(main())
