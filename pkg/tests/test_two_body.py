import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from latbound import Coupling, QuadGrid, band_spectrum_h, det2, dispersion_curve, eigenfunction2, solve_bound_state
from latbound.errors import InvalidArgument, PoleProximityError, SolverError
from latbound.oracle import apply_h, grid_norm
from latbound.two_body import solve_energies

SQRT17 = math.sqrt(17.0)

PI = math.pi


def closed_form(mu, k=0.0):
    """d=1, gamma=1: e(k) = 4 +- sqrt(16 cos^2(k/2) + mu^2)."""
    return 4 + math.copysign(math.sqrt(16 * math.cos(k / 2) ** 2 + mu * mu), mu)


def test_det2_vanishes_at_closed_form(g256):
    assert abs(det2(0.0, 4 - SQRT17, Coupling(-1.0), g256)) < 1e-10


def test_det2_residue_value(g256):
    assert det2(0.0, -1.0, Coupling(-1.0), g256) == pytest.approx(2 / 3, abs=1e-12)


@pytest.mark.parametrize("mu", [-3.0, 0.5])
def test_det2_tends_to_one(mu, g64):
    for z in (1e6, -1e6):
        assert abs(det2(0.3, z, Coupling(mu), g64) - 1) < 1e-5


def test_det2_pole_guard():
    g = QuadGrid(1, 8)
    with pytest.raises(PoleProximityError) as exc:
        det2(0.0, 0.0, Coupling(1.0), g)  # E2_0(q=0) = 0 is a node energy
    assert np.allclose(exc.value.node, [0.0])


@pytest.mark.parametrize("mu", [1.0, -1.0, 2.5])
def test_det2_monotone_on_bound_state_side(mu, g64):
    # increasing in z for mu > 0, decreasing for mu < 0, on both sides of the band
    cpl = Coupling(mu)
    above = [det2(0.4, z, cpl, g64) for z in np.linspace(8.5, 40, 30)]
    below = [det2(0.4, z, cpl, g64) for z in np.linspace(-40, -0.5, 30)]
    for seq in (above, below):
        d = np.diff(seq)
        assert np.all(d > 0) if mu > 0 else np.all(d < 0)


@pytest.mark.parametrize("mu", [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0])
def test_solve_closed_form(mu, g256):
    s = solve_bound_state(0.0, Coupling(mu), g256)
    assert abs(s.energy - closed_form(mu)) < 1e-8
    assert s.side == ("above-band" if mu > 0 else "below-band")
    assert s.binding > 0 and s.resolved and s.residual < 1e-10


@pytest.mark.parametrize("mu", [-1.0, 1.0, 3.7])
@pytest.mark.parametrize("dim", [1, 2])
def test_degenerate_fiber(mu, dim):
    s = solve_bound_state([PI] * dim, Coupling(mu, 1.0, dim), QuadGrid(dim, 16))
    assert abs(s.energy - (4 * dim + mu)) <= 1e-12
    assert s.band.degenerate


@given(st.floats(-PI, PI, exclude_max=True), st.sampled_from([-2.0, -1.0, 1.0, 2.0]))
def test_closed_form_all_k(k, mu):
    s = solve_bound_state(k, Coupling(mu), QuadGrid(1, 256))
    assert abs(s.energy - closed_form(mu, k)) < 1e-8


@given(st.floats(-PI, PI, exclude_max=True), st.floats(0.3, 4.0), st.floats(0.5, 4.0), st.booleans())
def test_side_and_uniqueness(k, gamma, mag, neg):
    # solve_bound_state asserts the absence of a second sign change itself
    mu = -mag if neg else mag
    s = solve_bound_state(k, Coupling(mu, gamma), QuadGrid(1, 128))
    if s.resolved:
        assert (s.energy > s.band.hi) if mu > 0 else (s.energy < s.band.lo)


def test_batched_solver_matches_scalar(g256):
    ks = np.linspace(-PI, PI, 9, endpoint=False)
    for mu, gamma in ((1.0, 1.0), (-0.7, 2.0)):
        cpl = Coupling(mu, gamma)
        batch = solve_energies(ks, cpl, g256)
        single = [solve_bound_state(k, cpl, g256).energy for k in ks]
        assert np.allclose(batch, single, atol=1e-11, rtol=0)


@pytest.mark.parametrize("mu", [-2.0, -0.5, 0.5, 1.0])
@pytest.mark.parametrize("k", [0.0, 1.1, 2.9])
def test_grid_convergence_d1(mu, k):
    a = solve_bound_state(k, Coupling(mu), QuadGrid(1, 256)).energy
    b = solve_bound_state(k, Coupling(mu), QuadGrid(1, 512)).energy
    assert abs(a - b) < 1e-9


@pytest.mark.parametrize("mu, k", [(4.0, (PI / 2, PI / 2)), (-4.0, (2.5, 2.5)), (2.0, (2.5, 2.5))])
def test_grid_convergence_d2_resolved_binding(mu, k):
    # holds where the binding is resolvable; near k = 0 with |mu| <= 2 it is not (see ledger)
    a = solve_bound_state(k, Coupling(mu, 1.0, 2), QuadGrid(2, 48))
    b = solve_bound_state(k, Coupling(mu, 1.0, 2), QuadGrid(2, 96))
    assert a.binding > 0.1
    assert abs(a.energy - b.energy) < 1e-9


def test_unresolved_flag_in_d2():
    s = solve_bound_state((-0.0654, 0.0), Coupling(1.0, 1.0, 2), QuadGrid(2, 48))
    assert not s.resolved


def test_weak_coupling_ratio():
    g = QuadGrid(1, 4096)
    ratios = []
    for mu in (0.8, 0.4, 0.2):
        e = solve_bound_state(0.0, Coupling(mu), g).energy
        exact = math.sqrt(16 + mu * mu) - 4
        assert abs((e - 8) - exact) < 1e-10
        ratios.append((e - 8) / (mu * mu / 8))
    assert all(r < 1 for r in ratios) and np.all(np.diff(ratios) > 0)
    assert abs(ratios[-1] - 1) < 1e-3


def test_eigenfunction(g256):
    cpl = Coupling(-1.0)
    s = solve_bound_state(0.0, cpl, g256)
    f = eigenfunction2(s, cpl, g256)
    assert abs(grid_norm(f, g256) - 1) < 1e-12
    assert np.allclose(f, f[g256.negation_index()], atol=1e-14)
    assert np.argmax(np.abs(f)) == g256.index_of(0.0)
    r = apply_h(f, 0.0, cpl, g256) - s.energy * f
    assert grid_norm(r, g256) < 1e-8


def test_eigenfunction_degenerate():
    g = QuadGrid(1, 16)
    s = solve_bound_state(PI, Coupling(2.0), g)
    assert np.array_equal(eigenfunction2(s, Coupling(2.0), g), np.ones(16))


def test_eigenfunction_rejects_bad_state(g64):
    from dataclasses import replace
    s = solve_bound_state(0.0, Coupling(1.0), g64)
    with pytest.raises(InvalidArgument):
        eigenfunction2(replace(s, residual=1.0), Coupling(1.0), g64)


@pytest.mark.parametrize("mu", [1.0, -1.0, 2.0, -0.5])
def test_dispersion_curve_extremum_at_zero(mu, g256):
    ks = QuadGrid(1, 64)
    states = dispersion_curve(Coupling(mu), ks, g256)
    e = np.array([s.energy for s in states])
    j = np.argmax(e) if mu > 0 else np.argmin(e)
    assert ks.nodes[j][0] == 0.0
    assert np.allclose(e, e[ks.negation_index()], atol=1e-12)


def test_dispersion_curve_tags_errors(g64):
    with pytest.raises(SolverError) as exc:
        dispersion_curve(Coupling(1.0), [[0.0], [0.5]], g64, tol=-1.0)
    assert np.allclose(exc.value.momentum, [0.0])


def test_band_spectrum_h(g256):
    b = band_spectrum_h(Coupling(1.0), QuadGrid(1, 64), g256)
    assert b.hi == pytest.approx(4 + SQRT17, abs=1e-8)
    assert b.lo == pytest.approx(5.0, abs=1e-8)
    assert abs(b.argmax[0].coords[0]) < 1e-6  # flat maximum: location to ~sqrt(eps)
    assert b.hi >= b.lo
