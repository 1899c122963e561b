import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from latbound import QuadGrid, TorusPoint, quad_integrate, wrap
from latbound.errors import EvaluationError, InvalidArgument
from latbound.torus import pi_point, refine_extremum, wrap_array

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


@pytest.mark.parametrize("raw, expected", [
    ((0.0,), (0.0,)),
    ((3 * math.pi,), (-math.pi,)),
    ((math.pi / 2, -5 * math.pi / 2), (math.pi / 2, -math.pi / 2)),
    ((math.pi,), (-math.pi,)),
])
def test_wrap_examples(raw, expected):
    assert np.allclose(wrap(raw).coords, expected, atol=1e-12)


@given(st.lists(finite, min_size=1, max_size=2))
def test_wrap_range_and_congruence(xs):
    p = wrap(xs)
    for x, c in zip(xs, p.coords):
        assert -math.pi <= c < math.pi
        r = (x - c) / (2 * math.pi)
        assert abs(r - round(r)) < 1e-9 * max(1.0, abs(x))


def test_wrap_tiny_negative_stays_below_pi():
    assert wrap_array(-1e-300) < math.pi


@pytest.mark.parametrize("bad", [(float("nan"),), (float("inf"), 0.0)])
def test_wrap_rejects_non_finite(bad):
    with pytest.raises(InvalidArgument):
        wrap(bad)


def test_torus_point_checks_range():
    with pytest.raises(InvalidArgument):
        TorusPoint((math.pi,))
    with pytest.raises(InvalidArgument):
        TorusPoint((0.0, 0.0, 0.0))
    assert (-TorusPoint.of(1.0)).coords == (-1.0,)
    assert pi_point(2).coords == (-math.pi, -math.pi)


@pytest.mark.parametrize("dim, n", [(1, 7), (1, 6), (3, 8)])
def test_grid_validation(dim, n):
    with pytest.raises(InvalidArgument):
        QuadGrid(dim, n)


@pytest.mark.parametrize("dim, n", [(1, 8), (1, 64), (2, 8), (2, 12)])
def test_grid_invariants(dim, n):
    g = QuadGrid(dim, n)
    assert g.nodes.shape == (n**dim, dim)
    assert math.fsum(g.weights) == 1.0
    assert len({tuple(p) for p in g.nodes}) == g.size
    neg = g.negation_index()
    assert np.allclose(wrap_array(-g.nodes), g.nodes[neg])
    assert g.index_of(np.zeros(dim)) == g.index_of(np.zeros(dim))
    g.index_of([math.pi] * dim)  # the corner is a node


def test_index_of_rejects_off_grid():
    with pytest.raises(InvalidArgument):
        QuadGrid(1, 8).index_of(0.1)


@pytest.mark.parametrize("dim, n", [(1, 8), (1, 10), (2, 8)])
def test_difference_index(dim, n):
    g = QuadGrid(dim, n)
    D = g.difference_index()
    P = g.nodes
    diff = wrap_array(P[:, None, :] - P[None, :, :])
    assert np.allclose(P[D], diff)


def test_quad_constant_and_cos():
    assert quad_integrate(lambda p: np.ones(len(p)), QuadGrid(2, 8)) == 1.0
    assert abs(quad_integrate(lambda p: np.cos(p[:, 0]), QuadGrid(1, 32))) < 1e-15


def test_quad_residue_identity():
    # int dq/(2 pi) 1/(3 - 2 cos q) = 1/sqrt(5)
    val = quad_integrate(lambda p: 1.0 / (3 - 2 * np.cos(p[:, 0])), QuadGrid(1, 64))
    assert abs(val - 1 / math.sqrt(5)) < 1e-12


@pytest.mark.parametrize("m", range(1, 8))
def test_quad_exact_for_trig_polynomials(m):
    g = QuadGrid(1, 8)
    assert abs(quad_integrate(lambda p: np.cos(m * p[:, 0]), g)) < 1e-14


def test_quad_reports_bad_node():
    with pytest.raises(EvaluationError) as exc, np.errstate(divide="ignore"):
        quad_integrate(lambda p: 1.0 / p[:, 0], QuadGrid(1, 8))
    assert np.allclose(exc.value.node, [0.0])


def test_quad_spectral_convergence():
    f = lambda p: np.exp(np.cos(p[:, 0]) + 0.5 * np.sin(p[:, 1]))  # noqa: E731
    a = quad_integrate(f, QuadGrid(2, 16))
    b = quad_integrate(f, QuadGrid(2, 32))
    assert abs(a - b) < 1e-10


@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(1, 4))
def test_quad_linear_and_negation_symmetric(a, b, m):
    g = QuadGrid(1, 16)
    f = lambda p: np.exp(np.sin(m * p[:, 0] + 0.3))  # noqa: E731
    h = lambda p: np.cos(p[:, 0]) ** 2 + p[:, 0] * 0  # noqa: E731
    lhs = quad_integrate(lambda p: a * f(p) + b * h(p), g)
    rhs = a * quad_integrate(f, g) + b * quad_integrate(h, g)
    assert abs(lhs - rhs) < 1e-12 * (1 + abs(a) + abs(b))
    neg = g.negation_index()  # nodes are closed under negation; fsum is order independent
    assert quad_integrate(lambda p: f(p[neg]), g) == quad_integrate(f, g)


def test_refine_extremum_never_worse():
    f = lambda x: float(np.cos(x[0] - 0.3))  # noqa: E731
    x, v = refine_extremum(f, [0.25], 0.1, maximize=True)
    assert abs(x[0] - 0.3) < 1e-6 and v >= f([0.25])
    x, v = refine_extremum(lambda x: float(np.sum((x - 0.2) ** 2)), [0.0, 0.0], 0.5)
    assert np.allclose(x, 0.2, atol=1e-5)
