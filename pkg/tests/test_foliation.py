import numpy as np
import pytest

from mafoliation.analysis import sample_points
from mafoliation.catalog import CATALOG, HOLOMORPHIC, catalog_get, potentials
from mafoliation.config import DEFAULT
from mafoliation.dsl import eval_jet, parse_frame, parse_potential
from mafoliation.errors import NotPlurisubharmonic, RankDeficient, RankMismatch
from mafoliation.foliation import (
    LeviData,
    adapt_chart,
    build_frame,
    frobenius_residual,
    graph_frame_vectors,
    levi_matrix,
    ma_verify,
    twist_frame,
    twist_from_jet,
    twist_on_leaf,
    twist_potential,
)

LINEAR = parse_potential("abs2(z2)", 2, 1)
GRAPH = parse_potential("abs2(z2 - z1^2)", 2, 1)
HALF = parse_potential("im(z2)^2/im(z1)", 2, 1, ["im(z1)"])
SLOPE = parse_frame(["1, (z2-conj(z2))/(z1-conj(z1))"], 2, ["im(z1)"])
BENT = parse_frame(["1, conj(z1)"], 2)
CONST = parse_frame(["1, 0"], 2)


def _levi(spec, q):
    return levi_matrix(eval_jet(spec.expr, q, 2))


def _diag(w):
    n = len(w)
    v = np.eye(n, dtype=complex)
    return LeviData(np.diag(np.asarray(w, dtype=complex)), np.asarray(w, float), v, 0, 0.0)


# Levi matrix and rank --------------------------------------------------------------


@pytest.mark.parametrize("q", [(0, 0), (0.4 - 1j, 2 + 3j)])
def test_levi_of_abs2(q):
    L = _levi(LINEAR, q)
    assert np.array_equal(L.H_full, np.diag([0, 1]))
    assert L.rank == 1


def test_levi_of_graph():
    L = _levi(GRAPH, (1, 1))
    assert np.allclose(L.H_full, [[4, -2], [-2, 1]], atol=1e-14)
    assert L.rank == 1
    assert np.allclose(L.eigenvalues, [0, 5], atol=1e-13)


def test_levi_block_form_n3():
    spec = parse_potential("im(z2)^2/im(z1) + abs2(z3)", 3, 2, ["im(z1)"])
    L = _levi(spec, (1j, 0, 0))
    assert np.allclose(L.H_full, np.diag([0, 0.5, 1]), atol=1e-15)
    assert L.rank == 2


def test_ma_verify_examples():
    v = ma_verify(_diag([0, 1]), 1)
    assert (v.rank, v.degenerate, v.nondegenerate) == (1, True, True)
    v = ma_verify(_diag([0, 1, 1]), 1)
    assert (v.rank, v.degenerate, v.nondegenerate) == (2, False, False)
    with pytest.raises(NotPlurisubharmonic):
        ma_verify(_diag([-1, 1]), 1)


def test_graph_has_rank_one_everywhere():
    rng = np.random.default_rng(11)
    for _ in range(50):
        rad = np.sqrt(rng.uniform(size=2))
        q = rad * np.exp(2j * np.pi * rng.uniform(size=2))
        assert ma_verify(_levi(GRAPH, q), 1).rank == 1


def test_levi_hermitian_on_catalog():
    for e in potentials():
        spec = e.spec
        for q in sample_points(spec.box, 2, 10):
            if spec.guards_ok(q):
                assert _levi(spec, q).hermitian_defect <= 1e-12


# adapted charts -----------------------------------------------------------------------


def _phase_identity(U):
    return np.allclose(np.abs(U), np.eye(U.shape[0]), atol=1e-14)


def test_linear_is_already_adapted():
    q = (0.3 + 0.1j, 0.2 - 0.4j)
    c = adapt_chart(LINEAR, q)
    assert _phase_identity(c.U)
    assert np.allclose(c.jet.coeffs, eval_jet(LINEAR.expr, q, 5).coeffs, atol=1e-15)


def test_halfplane_is_adapted_on_the_real_axis():
    c = adapt_chart(HALF, (1j, 0))
    assert _phase_identity(c.U)
    assert c.block_defect() <= 1e-15
    assert c.levi.H_full[1, 1] == pytest.approx(0.5)


def test_graph_kernel_direction():
    c = adapt_chart(GRAPH, (1, 1))
    k = c.U[:, 0]
    assert abs(abs(np.vdot(k, np.array([1, 2]) / np.sqrt(5))) - 1) <= 1e-12
    L = levi_matrix(c.jet)
    assert np.allclose(L.H_full, np.diag([0, 5]), atol=1e-12)
    assert c.block_defect() <= 1e-12


def test_graph_leaf_is_straightened():
    # the leaf z2 = z1^2 + c is curved, so the chart needs a nonzero leaf map
    c = adapt_chart(GRAPH, (1, 1))
    assert max(np.max(np.abs(phi.coeffs)) for phi in c.leaf_map) > 0.1
    assert c.straighten_residual <= DEFAULT.leaf_straighten
    # Lambda vanishes to all orders along w2 = 0
    f = build_frame(c)
    assert np.max(np.abs(f.B)) <= 1e-12


def test_unitarity_and_eigenvalues_preserved():
    for e in potentials():
        spec = e.spec
        for q in sample_points(spec.box, 4, 5):
            if not spec.guards_ok(q):
                continue
            c = adapt_chart(spec, q)
            assert np.max(np.abs(c.U.conj().T @ c.U - np.eye(spec.n))) <= 1e-12
            after = np.sort(np.linalg.eigvalsh(levi_matrix(c.jet).H_full))
            before = np.sort(c.levi.eigenvalues)
            top = max(1.0, np.max(np.abs(before)))
            assert np.max(np.abs(after - before)) <= 1e-10 * top


def test_rank_mismatch_is_reported():
    with pytest.raises(RankMismatch) as info:
        adapt_chart(parse_potential("abs2(z2) + abs2(z1)", 2, 1), (0, 0))
    assert (info.value.found, info.value.declared) == (2, 1)


# frames --------------------------------------------------------------------------------


def test_frame_of_linear():
    f = build_frame(adapt_chart(LINEAR, (0.5, 0.5j)))
    assert np.allclose(f.Lam, 0) and np.allclose(f.H, [[1]]) and np.allclose(f.B, 0)
    assert np.allclose(f.vectors, [[1, 0]])


def test_frame_of_graph_in_original_coordinates():
    f = build_frame(eval_jet(GRAPH.expr, (1, 1), 2), p=1)
    assert np.allclose(f.Lam, [[-2]]) and np.allclose(f.H, [[1]])
    assert np.allclose(f.B, [[2]])
    assert f.annihilation <= 1e-15


@pytest.mark.parametrize("x,y", [(1.0, 0.0), (0.7, -0.3), (2.0, 1.5)])
def test_frame_of_halfplane(x, y):
    f = build_frame(eval_jet(HALF.expr, (0.4 + 1j * x, 0.1 + 1j * y), 2), p=1)
    assert f.B[0, 0] == pytest.approx(y / x, abs=1e-14)


def test_frame_annihilates_levi_on_catalog():
    for e in potentials():
        spec = e.spec
        for q in sample_points(spec.box, 6, 5):
            if spec.guards_ok(q):
                assert build_frame(adapt_chart(spec, q)).annihilation <= 1e-9


# twist ---------------------------------------------------------------------------------


def test_twist_vanishes_for_linear_and_graph():
    assert twist_potential(adapt_chart(LINEAR, (0.2, 0.3j))).max_abs == 0
    t = twist_potential(adapt_chart(GRAPH, (1, 1)))
    assert t.max_abs <= 1e-12
    assert np.all(np.abs(t.norms) <= 1e-20)


def test_twist_of_halfplane():
    c = adapt_chart(HALF, (1j, 0))
    t = twist_potential(c)
    assert t.C[0, 0, 0] == pytest.approx(-0.5j, abs=1e-14)
    assert t.norms[0] == pytest.approx(0.25, rel=1e-14)
    # the on-leaf formula agrees where Lambda vanishes
    assert np.allclose(twist_on_leaf(c), t.C, atol=1e-14)


@pytest.mark.parametrize("x,y", [(0.6, 0.2), (1.7, -1.1)])
def test_halfplane_twist_in_graph_frame(x, y):
    # in the original coordinates the leaf frame is d1 + (y/x) d2
    q = (0.3 + 1j * x, -0.5 + 1j * y)
    t = twist_from_jet(eval_jet(HALF.expr, q, 3), 1, basis="graph")
    assert t.C[0, 0, 0] == pytest.approx(-0.5j / x, rel=1e-12)
    assert t.norms[0] == pytest.approx(1 / (4 * x * x), rel=1e-12)


def test_twist_norms_are_nonnegative():
    for e in potentials():
        spec = e.spec
        for q in sample_points(spec.box, 8, 5):
            if spec.guards_ok(q):
                assert np.min(twist_potential(adapt_chart(spec, q)).norms) >= -1e-12


def test_twist_vanishes_on_holomorphic_entries():
    for name in HOLOMORPHIC:
        spec = catalog_get(name).spec
        worst = max(twist_potential(adapt_chart(spec, q)).max_abs for q in sample_points(spec.box, 9, 100))
        assert worst <= 1e-9, name


def test_graph_frame_vectors_singular_block():
    assert graph_frame_vectors(_diag([1, 0]), 1) is None


# frame input ---------------------------------------------------------------------------


def test_constant_frame():
    q = (0.3 - 2j, 1 + 1j)
    assert twist_frame(CONST, q).max_abs == 0
    assert frobenius_residual(CONST, q) == 0


def test_slope_frame_twist():
    t = twist_frame(SLOPE, (1j, 0), normals=[[0, 1]])
    assert t.C[0, 0, 0] == pytest.approx(-0.5j, abs=1e-15)
    # the default complement at (i, 0) is also d2
    assert twist_frame(SLOPE, (1j, 0)).C[0, 0, 0] == pytest.approx(-0.5j, abs=1e-15)


def test_slope_frame_is_integrable():
    for q in [(1j, 0), (0.3 + 0.8j, 0.1 - 0.2j), (-1 + 2j, 3j)]:
        assert frobenius_residual(SLOPE, q) <= 1e-10


def test_bent_frame_is_not_integrable():
    assert frobenius_residual(BENT, (0, 0)) >= 0.5


def test_rank_deficient_frame():
    with pytest.raises(RankDeficient):
        frobenius_residual(parse_frame(["z1, z2"], 2), (0, 0))


def test_twist_agreement_potential_vs_frame():
    rng = np.random.default_rng(5)
    for _ in range(10):
        x, y = rng.uniform(0.5, 2), rng.uniform(-1, 1)
        q = (complex(rng.uniform(-1, 1), x), complex(rng.uniform(-1, 1), y))
        tp = twist_from_jet(eval_jet(HALF.expr, q, 3), 1, basis="graph").C[0, 0, 0]
        # normal generator d2 completes the frame d1 + (y/x) d2
        tf = twist_frame(SLOPE, q, normals=[[0, 1]]).C[0, 0, 0]
        assert abs(tp - tf) <= 1e-8 * abs(tp)


def test_catalog_frames_listed():
    assert {e.name for e in CATALOG.values() if e.kind == "frame"} >= {"slope-frame", "noninvolutive-frame"}
