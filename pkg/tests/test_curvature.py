import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mafoliation.analysis import sample_points
from mafoliation.catalog import HOLOMORPHIC, catalog_get, potentials
from mafoliation.config import DEFAULT
from mafoliation.curvature import (
    compare_potentials,
    curvature_gap,
    fifth_identity,
    fifth_rhs,
    fourth_identity,
    ricci_matrix,
    trace_inequality,
    twist_ricci_identity,
)
from mafoliation.dsl import Box, parse_potential
from mafoliation.errors import NotSameFoliation, OrderExceeded, SkippedLowS
from mafoliation.foliation import adapt_chart, twist_potential
from mafoliation.jets import MultiIndex

LINEAR = parse_potential("abs2(z2)", 2, 1)
GRAPH = parse_potential("abs2(z2 - z1^2)", 2, 1)
HALF = catalog_get("halfplane").spec
HALF3 = catalog_get("halfplane3").spec
# a bent image of the half-plane example: curved leaves and a nonzero twist
BENT = parse_potential("im(z2 + 0.1*z1^2)^2/im(z1 + 0.2*z2^2)", 2, 1, ["im(z1 + 0.2*z2^2)"],
                       Box(((-0.3, 0.3), (-0.3, 0.3)), ((1.0, 1.5), (-0.3, 0.3))))


# Ricci matrix ----------------------------------------------------------------------


def test_ricci_of_linear_is_zero():
    rep = ricci_matrix(adapt_chart(LINEAR, (0.1, 0.2j)))
    assert np.array_equal(rep.S_matrix, [[0]]) and np.array_equal(rep.S_closed, [[0]])


@pytest.mark.parametrize("x", [0.5, 1.0, 2.5])
def test_ricci_of_halfplane(x):
    rep = ricci_matrix(adapt_chart(HALF, (1j * x, 0)))
    assert rep.S_matrix[0, 0] == pytest.approx(1 / (4 * x * x), rel=1e-12)
    assert rep.S_closed[0, 0] == pytest.approx(1 / (4 * x * x), rel=1e-12)


def test_ricci_of_graph_is_zero():
    rep = ricci_matrix(adapt_chart(GRAPH, (1, 1)))
    assert np.max(np.abs(rep.S_matrix)) <= 1e-12 and np.max(np.abs(rep.S_closed)) <= 1e-12


def test_ricci_needs_order_four():
    with pytest.raises(OrderExceeded):
        ricci_matrix(adapt_chart(HALF, (1j, 0), order=3))


def test_two_routes_agree_on_catalog():
    for e in potentials():
        spec = e.spec
        for q in sample_points(spec.box, 21, 5):
            if not spec.guards_ok(q):
                continue
            rep = ricci_matrix(adapt_chart(spec, q))
            assert rep.route_residual <= 1e-8, e.name
            top = max(1.0, float(np.max(np.abs(rep.S_closed))))
            assert rep.psd_margin >= -1e-10 * top


# twist and curvature ------------------------------------------------------------------


def _identity(spec, q):
    c = adapt_chart(spec, q)
    rep = ricci_matrix(c)
    return rep, twist_potential(c), twist_ricci_identity(c, twist_potential(c), rep)


def test_twist_ricci_linear():
    _, _, chk = _identity(LINEAR, (0.3 + 0.1j, 0.2 - 0.4j))
    assert chk.residual <= 1e-12


@pytest.mark.parametrize("spec,q", [(HALF, (1j, 0)), (HALF3, (1j, 0, 0))])
def test_twist_ricci_halfplanes(spec, q):
    rep, tw, chk = _identity(spec, q)
    assert rep.S_matrix[0, 0] == pytest.approx(0.25, rel=1e-12)
    assert tw.norms[0] == pytest.approx(0.25, rel=1e-12)
    assert chk.residual <= 1e-8


def test_twist_ricci_on_catalog_and_bent_example():
    for spec in [e.spec for e in potentials()] + [BENT]:
        for q in sample_points(spec.box, 22, 5):
            if spec.guards_ok(q):
                assert _identity(spec, q)[2].residual <= 1e-8


def test_bent_example_is_nontrivial():
    q = (0.1 + 1.2j, 0.3 - 0.2j)
    c = adapt_chart(BENT, q)
    assert max(np.max(np.abs(phi.coeffs)) for phi in c.leaf_map) > 1e-3
    rep, tw, chk = _identity(BENT, q)
    assert rep.S_matrix[0, 0].real > 1e-2
    assert chk.residual <= 1e-10


# fourth and fifth derivatives -------------------------------------------------------


def test_fourth_identity_linear():
    rep = fourth_identity(adapt_chart(LINEAR, (0, 0)))
    assert rep.residual == 0 and rep.vanishing == 0


def test_fourth_identity_halfplane_value():
    c = adapt_chart(HALF, (1j, 0))
    assert c.jet[MultiIndex.of(2, holo=[0, 1], anti=[0, 1])] == pytest.approx(0.25, rel=1e-13)
    assert fourth_identity(c).residual <= 1e-9


@pytest.mark.parametrize("spec,q", [(GRAPH, (1, 1)), (HALF3, (1j, 0, 0)), (BENT, (0.1 + 1.2j, 0.3 - 0.2j))])
def test_fourth_identity_holds(spec, q):
    rep = fourth_identity(adapt_chart(spec, q))
    assert rep.residual <= 1e-9
    assert rep.vanishing <= 1e-9


def test_fifth_identity_linear_is_zero():
    c = adapt_chart(LINEAR, (0, 0))
    rhs, terms = fifth_rhs(c, 0)
    assert np.all(rhs == 0) and len(terms) == 8
    assert fifth_identity(c).residual == 0


@pytest.mark.parametrize("spec,q", [(HALF, (1j, 0)), (HALF3, (1j, 0, 0)), (BENT, (0.1 + 1.2j, 0.3 - 0.2j))])
def test_fifth_identity_holds(spec, q):
    assert fifth_identity(adapt_chart(spec, q)).residual <= 1e-7


def test_identities_at_catalog_points():
    for e in potentials():
        spec = e.spec
        for q in sample_points(spec.box, 23, 4):
            if spec.guards_ok(q):
                c = adapt_chart(spec, q)
                assert fourth_identity(c).residual <= 1e-8, e.name
                assert fifth_identity(c).residual <= 1e-7, e.name


# curvature gap -----------------------------------------------------------------------


@pytest.mark.parametrize("x,re1,re2", [(1.0, 0, 0), (0.6, 0.4, -0.3), (1.8, -1.0, 0.5)])
def test_gap_equality_for_halfplane(x, re1, re2):
    g = curvature_gap(adapt_chart(HALF, (re1 + 1j * x, re2)), 0)
    assert g.S_value == pytest.approx(1 / (4 * x * x), rel=1e-12)
    assert g.logS_laplacian == pytest.approx(1 / (2 * x * x), rel=1e-10)
    assert g.equality_residual <= 1e-6 * g.S_value
    assert g.Sj_residual <= 1e-7 and g.Sjj_residual <= 1e-7


def test_gap_equality_off_the_real_axis():
    # at Im z2 != 0 the leaf through q is a tilted line; S is still 1/(4 Im^2 z1) on it
    for q in sample_points(HALF.box, 24, 10):
        g = curvature_gap(adapt_chart(HALF, q), 0)
        assert g.equality_residual <= 1e-6 * g.S_value


def test_gap_inequality_codim_two():
    for q in [(1j, 0, 0)] + sample_points(HALF3.box, 25, 10):
        g = curvature_gap(adapt_chart(HALF3, q), 0)
        assert not g.skipped
        assert g.gap >= -1e-8
        assert g.equality_residual is None


def test_gap_on_bent_example():
    g = curvature_gap(adapt_chart(BENT, (0.1 + 1.2j, 0.3 - 0.2j)), 0)
    assert g.equality_residual <= 1e-6 * g.S_value
    assert g.Sj_residual <= 1e-7 and g.Sjj_residual <= 1e-7


@pytest.mark.parametrize("name", sorted(HOLOMORPHIC))
def test_gap_skipped_on_holomorphic(name):
    spec = catalog_get(name).spec
    q = sample_points(spec.box, 26, 1)[0]
    g = curvature_gap(adapt_chart(spec, q), 0)
    assert g.skipped and g.gap is None


def test_gap_strict_raises():
    with pytest.raises(SkippedLowS):
        curvature_gap(adapt_chart(LINEAR, (0, 0)), 0, strict=True)


def test_gap_needs_order_five():
    with pytest.raises(OrderExceeded):
        curvature_gap(adapt_chart(HALF, (1j, 0), order=4), 0)


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(0.5, 2.0), st.floats(-1.0, 1.0))
def test_gap_is_scale_invariant(c, x, y):
    # no normalization of the normal block is needed: u -> c u leaves S and the gap alone
    scaled = parse_potential(f"{c!r} * (im(z2)^2/im(z1))", 2, 1, ["im(z1)"])
    q = (0.2 + 1j * x, 0.4 + 1j * y)
    a = curvature_gap(adapt_chart(HALF, q), 0)
    b = curvature_gap(adapt_chart(scaled, q), 0)
    assert b.S_value == pytest.approx(a.S_value, rel=1e-12)
    assert b.gap == pytest.approx(a.gap, abs=1e-10)


# trace inequality ----------------------------------------------------------------------


def test_trace_inequality_examples():
    assert trace_inequality(np.eye(2), 2) == 0
    assert trace_inequality(np.diag([1, 0]), 2) == pytest.approx(0.5)


def test_trace_inequality_random():
    rng = np.random.default_rng(0)
    for p in (1, 2, 3, 4):
        for _ in range(1000):
            A = rng.normal(size=(p, p)) + 1j * rng.normal(size=(p, p))
            assert trace_inequality(A, p) >= -1e-12 * max(1.0, np.linalg.norm(A) ** 4)


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_trace_equality_on_scaled_unitaries(p):
    rng = np.random.default_rng(p)
    Q, _ = np.linalg.qr(rng.normal(size=(p, p)) + 1j * rng.normal(size=(p, p)))
    assert abs(trace_inequality(0.7 * Q, p)) <= 1e-12


entries = st.floats(-3, 3, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 4).flatmap(lambda p: st.tuples(arrays(float, (p, p), elements=entries),
                                                      arrays(float, (p, p), elements=entries))))
def test_trace_inequality_property(pair):
    re, im = pair
    A = re + 1j * im
    assert trace_inequality(A) >= -1e-12 * max(1.0, np.linalg.norm(A) ** 4)


# comparing potentials ----------------------------------------------------------------


POINTS = [(1j, 0), (0.3 + 0.7j, 0.2 - 0.1j), (-0.5 + 1.5j, 0.8 + 0.4j)]


def test_compare_with_itself():
    for spec, pts in [(HALF, POINTS), (GRAPH, [(1, 1), (0.2, -0.5j)])]:
        rep = compare_potentials(spec, spec, 1, pts)
        assert np.allclose(rep.lambdas, 1, rtol=1e-12)
        assert rep.leafwise_derivative_residual <= 1e-12


def test_compare_scaled():
    v = parse_potential("3*(im(z2)^2/im(z1))", 2, 1, ["im(z1)"])
    rep = compare_potentials(HALF, v, 1, POINTS)
    assert np.allclose(rep.lambdas, 3, rtol=1e-12)
    assert rep.leafwise_derivative_residual <= 1e-9


def test_compare_pluriharmonic_shift():
    v = parse_potential("im(z2)^2/im(z1) + re(z1)", 2, 1, ["im(z1)"])
    rep = compare_potentials(HALF, v, 1, POINTS)
    assert np.allclose(rep.lambdas, 1, rtol=1e-12)
    assert rep.leafwise_derivative_residual <= 1e-9


def test_compare_different_foliations():
    with pytest.raises(NotSameFoliation):
        compare_potentials(HALF, parse_potential("abs2(z2 - z1^2)", 2, 1), 1, [(0.3 + 0.7j, 0.2 - 0.1j)])


def test_default_tolerances_in_use():
    assert DEFAULT.gap_threshold == 1e-8 and DEFAULT.identity == 1e-8
