import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from latbound import Coupling, QuadGrid, band_three_body, eigenfunction2, solve_bound_state
from latbound import oracle
from latbound.errors import InvalidArgument, SizeLimitError

PI = math.pi


def random_antisymmetric(n, seed):
    a = np.random.default_rng(seed).normal(size=(n, n))
    return a - a.T


def test_h_matrix_closed_form(g256):
    H = oracle.h_matrix(0.0, Coupling(-1.0), g256)
    assert np.array_equal(H.entries, H.entries.T)
    assert abs(H.extremal("min") - (4 - math.sqrt(17))) < 1e-8


def test_h_matrix_degenerate_spectrum():
    g = QuadGrid(1, 16)
    ev = oracle.h_matrix(PI, Coupling(1.5), g).eigenvalues()
    assert np.allclose(ev[:-1], 4.0, atol=1e-12) and abs(ev[-1] - 5.5) < 1e-12


def test_h_matrix_small_mu_edge(g64):
    lam = [oracle.h_matrix(0.0, Coupling(mu), g64).extremal("max") for mu in (1.0, 0.1, 0.001)]
    assert np.all(np.diff(lam) < 0) and abs(lam[-1] - 8) < 1e-3


@pytest.mark.parametrize("mu", [-1.0, 1.0])
@pytest.mark.parametrize("k", [0.0, 1.3])
def test_h_matrix_vs_det2(mu, k, g256):
    e = solve_bound_state(k, Coupling(mu), g256).energy
    lam = oracle.h_matrix(k, Coupling(mu), g256).extremal("max" if mu > 0 else "min")
    assert abs(e - lam) < 1e-8


def test_size_limits():
    with pytest.raises(SizeLimitError):
        oracle.h_matrix(0.0, Coupling(1.0), QuadGrid(2, 80))
    with pytest.raises(SizeLimitError):
        oracle.H_matrix(0.0, Coupling(1.0), QuadGrid(1, 160))


@pytest.mark.parametrize("dim, n", [(1, 16), (2, 8)])
def test_H_matrix_antisymmetric_basis(dim, n):
    g = QuadGrid(dim, n)
    H = oracle.H_matrix(0.3 * np.ones(dim), Coupling(2.0, 1.5, dim), g)
    assert H.dim == g.size * (g.size - 1) // 2
    assert np.array_equal(H.entries, H.entries.T)


@pytest.mark.parametrize("dim, n", [(1, 12), (2, 8)])
def test_apply_H_matches_matrix(dim, n):
    g = QuadGrid(dim, n)
    cpl = Coupling(-1.3, 2.0, dim)
    K = np.full(dim, 0.8)
    H = oracle.H_matrix(K, cpl, g)
    v = np.random.default_rng(1).normal(size=H.dim)
    lhs = oracle.pairs_to_grid(H.entries @ v, g, H.pairs)
    rhs = oracle.apply_H(oracle.pairs_to_grid(v, g, H.pairs), K, cpl, g)
    assert np.allclose(lhs, rhs, atol=1e-12 * g.size)
    assert oracle.grid_norm(oracle.pairs_to_grid(v, g), g) == pytest.approx(np.linalg.norm(v))


@pytest.mark.parametrize("dim, n", [(1, 8), (1, 10), (2, 8)])
def test_fermion_contact_vanishes(dim, n):
    assert np.max(np.abs(oracle.fermion_contact_matrix(QuadGrid(dim, n)))) < 1e-14


@pytest.mark.parametrize("K", [0.0, 1.0, PI])
def test_H_matrix_min_above_kinetic_bottom(K, g32):
    cpl = Coupling(1.0)
    lam = oracle.H_matrix(K, cpl, g32).extremal("min")
    assert lam >= band_three_body(K, 1.0, g32).lo - 1e-10


@given(st.integers(0, 10_000))
def test_pauli_random_antisymmetric(seed):
    g = QuadGrid(1, 16)
    assert oracle.pauli_check(random_antisymmetric(16, seed), g) < 1e-12


def test_pauli_d2():
    g = QuadGrid(2, 8)
    assert oracle.pauli_check(random_antisymmetric(64, 3), g) < 1e-12


def test_pauli_negative_control():
    g = QuadGrid(1, 16)
    ones = np.ones((16, 16))
    assert np.max(np.abs(oracle.contact_amplitude(ones, g))) == pytest.approx(1.0)
    with pytest.raises(InvalidArgument):
        oracle.pauli_check(ones, g)
    with pytest.raises(InvalidArgument):
        oracle.pauli_check(np.zeros((3, 3)), g)


def test_decay_two_body(g256):
    slopes = {}
    for mu in (-2.0, -1.0, -0.5):
        cpl = Coupling(mu)
        s = solve_bound_state(0.0, cpl, g256)
        rep = oracle.decay_check(eigenfunction2(s, cpl, g256), g256)
        assert not rep.skipped and rep.slope < 0
        slopes[mu] = rep.slope
    # analytic rate for mu=-1: arccosh(1 + (sqrt(17) - 4)/4)
    assert slopes[-1.0] == pytest.approx(-math.acosh(1 + (math.sqrt(17) - 4) / 4), abs=2e-3)
    assert abs(slopes[-2.0]) > abs(slopes[-1.0]) > abs(slopes[-0.5])


def test_decay_constant_skipped():
    g = QuadGrid(1, 64)
    s = solve_bound_state(PI, Coupling(1.0), g)
    rep = oracle.decay_check(eigenfunction2(s, Coupling(1.0), g), g)
    assert rep.skipped and rep.passed is None and "delta-like" in rep.reason


def test_decay_input_checks():
    with pytest.raises(InvalidArgument):
        oracle.decay_check(2 * np.ones(64), QuadGrid(1, 64))
    with pytest.raises(InvalidArgument):
        oracle.decay_check(np.ones(48), QuadGrid(1, 48))
