"""Normal-bundle Ricci curvature and the derivative identities behind it.

Notation follows :mod:`foliation`: in an adapted chart the leaf
coordinates are ``0..r-1`` and the normal ones ``r..n-1``. ``Xh[a, b]``
stands for the inverse-metric entry ``H^{a bbar}``, i.e. the transpose of
``inv(H)``, so that ``sum_b Xh[a, b] u_{c bbar} = delta_ac``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import subspace_angles

from . import config
from .config import Tolerances
from .dsl import PotentialSpec, eval_jet
from .errors import NotSameFoliation, OrderExceeded, SkippedLowS
from .foliation import (
    AdaptedChart,
    TwistTensor,
    _chart_variables,
    adapt_chart,
    frame_jets,
    levi_matrix,
    mixed,
)
from .jets import MultiIndex, WJet, jet_apply, jet_det


def _u(chart: AdaptedChart, holo=(), anti=()) -> complex:
    return chart.jet[MultiIndex.of(chart.n, holo=holo, anti=anti)]


def _normal_block(chart: AdaptedChart) -> np.ndarray:
    n, r, p = chart.n, chart.r, chart.p
    return np.array([[chart.jet[mixed(n, r + a, r + b)] for b in range(p)] for a in range(p)])


def _rel(a: complex, b: complex, *terms: complex) -> float:
    scale = max([1.0, abs(a), abs(b)] + [abs(t) for t in terms])
    return abs(a - b) / scale


# Ricci matrix -----------------------------------------------------------------


@dataclass(frozen=True)
class CurvatureReport:
    """``S_matrix[j, k] = [log det H]_{j kbar}`` and its third-derivative Gram form."""

    S_matrix: np.ndarray
    S_closed: np.ndarray
    hermitian_defect: float
    psd_margin: float
    route_residual: float
    identity_residual: float | None = None


def ricci_matrix(chart: AdaptedChart, tol: Tolerances = config.DEFAULT) -> CurvatureReport:
    """Both routes to the curvature matrix at the chart center.

    ``S_matrix`` differentiates ``log det H`` twice (fourth derivatives of
    ``u``); ``S_closed[j,k] = sum H^{l mbar} H^{r sbar} u_{mbar j sbar} u_{l kbar r}``
    uses only third derivatives.
    """
    if chart.order < 4:
        raise OrderExceeded(4, chart.order)
    n, r, p = chart.n, chart.r, chart.p
    J = chart.jet
    Hj = [[J.shift(mixed(n, r + a, r + b)) for b in range(p)] for a in range(p)]
    logdet = jet_apply("log", jet_det(Hj, tol.near_zero))
    S = np.array([[logdet[mixed(n, j, k)] for k in range(r)] for j in range(r)])
    Xh = np.linalg.inv(_normal_block(chart)).T
    T = np.array([[[_u(chart, [j], [r + m, r + s]) for s in range(p)] for m in range(p)] for j in range(r)])
    R = np.array([[[_u(chart, [r + l, r + q], [k]) for q in range(p)] for l in range(p)] for k in range(r)])
    Sc = np.einsum("lm,qs,jms,klq->jk", Xh, Xh, T, R)
    herm = float(np.max(np.abs(S - S.conj().T), initial=0.0))
    psd = float(np.min(np.linalg.eigvalsh((Sc + Sc.conj().T) / 2)))
    route = float(np.max(np.abs(S - Sc))) / max(1.0, float(np.max(np.abs(S))))
    return CurvatureReport(S, Sc, herm, psd, route)


@dataclass(frozen=True)
class IdentityCheck:
    residual: float
    route_residual: float
    per_j: tuple[float, ...]


def twist_ricci_identity(chart: AdaptedChart, twist: TwistTensor, report: CurvatureReport) -> IdentityCheck:
    """``S^{j jbar} = ||L^j||^2`` for each leaf direction ``j``."""
    if twist.norms is None:
        raise ValueError("twist norms are needed (use twist_potential)")
    diag = np.real(np.diag(report.S_matrix))
    per = tuple(float(abs(s - t) / (1 + abs(s))) for s, t in zip(diag, twist.norms))
    return IdentityCheck(max(per, default=0.0), report.route_residual, per)


# fourth and fifth derivatives -------------------------------------------------


@dataclass(frozen=True)
class FourthReport:
    residual: float
    vanishing: float
    worst: tuple | None
    count: int


def _indices(n: int):
    return [("h", i) for i in range(n)] + [("a", i) for i in range(n)]


def _with(holo, anti, *extra):
    holo, anti = list(holo), list(anti)
    for kind, i in extra:
        (holo if kind == "h" else anti).append(i)
    return holo, anti


def fourth_identity(chart: AdaptedChart) -> FourthReport:
    """Residuals of ``u_{j kbar A B} = sum H^{l mbar} u_{l kbar A} u_{j mbar B} + (A <-> B)``.

    ``j, k`` run over leaf indices, ``A, B`` over all holomorphic and
    antiholomorphic indices. ``vanishing`` is the largest ``|u_{j kbar A B}|``
    with ``A`` or ``B`` a leaf index, relative to the normal-block scale.
    """
    if chart.order < 4:
        raise OrderExceeded(4, chart.order)
    n, r, p = chart.n, chart.r, chart.p
    Hn = _normal_block(chart)
    Xh = np.linalg.inv(Hn).T
    hscale = max(1.0, float(np.max(np.abs(Hn))))
    idx = _indices(n)
    worst_res, worst_at, vanish, count = 0.0, None, 0.0, 0

    def u(holo, anti, *extra):
        return _u(chart, *_with(holo, anti, *extra))

    for j in range(r):
        for k in range(r):
            for ia, A in enumerate(idx):
                for B in idx[ia:]:
                    lhs = u([j], [k], A, B)
                    t1 = sum(Xh[l, m] * u([r + l], [k], A) * u([j], [r + m], B) for l in range(p) for m in range(p))
                    t2 = sum(Xh[q, s] * u([r + q], [k], B) * u([j], [r + s], A) for q in range(p) for s in range(p))
                    res = abs(lhs - t1 - t2) / max(1.0, abs(lhs), abs(t1), abs(t2))
                    count += 1
                    if res > worst_res:
                        worst_res, worst_at = res, (j, k, A, B)
                    if A[1] < r or B[1] < r:
                        vanish = max(vanish, abs(lhs) / hscale)
    return FourthReport(worst_res, vanish, worst_at, count)


def _third_blocks(chart: AdaptedChart, j: int):
    r, p = chart.r, chart.p
    R = range(p)
    u = lambda h, a: _u(chart, h, a)  # noqa: E731
    return {
        # d_j H[c, b] = u_{c bbar j}
        "dH": np.array([[u([r + c, j], [r + b]) for b in R] for c in R]),
        # u_{j dbar mbar}
        "T": np.array([[u([j], [r + d, r + m]) for m in R] for d in R]),
        # u_{jbar a sbar}
        "Ab": np.array([[u([r + a], [j, r + s]) for s in R] for a in R]),
        # u_{j j bbar mbar}
        "Q": np.array([[u([j, j], [r + b, r + m]) for m in R] for b in R]),
        # u_{j dbar a}
        "Ta": np.array([[u([j, r + a], [r + d]) for a in R] for d in R]),
        # u_{jbar c a}
        "Bh": np.array([[u([r + c, r + a], [j]) for a in R] for c in R]),
        # u_{jbar jbar l r}
        "Qb": np.array([[u([r + l, r + q], [j, j]) for q in R] for l in R]),
    }


def fifth_rhs(chart: AdaptedChart, j: int) -> tuple[np.ndarray, list[np.ndarray]]:
    """Right-hand side for ``u_{j j mbar sbar jbar}`` from derivatives of order <= 4.

    Returns the ``p x p`` total and its eight terms. Differentiating the
    fourth-derivative identity along ``z_j`` gives, for the ``(m, s)``
    pairing, a connection term, a term carrying ``u_{j j bbar sbar}`` and
    two terms from substituting the fourth-order factor again; the other
    four are the same with ``m`` and ``s`` exchanged.
    """
    Xh = np.linalg.inv(_normal_block(chart)).T
    b = _third_blocks(chart, j)
    dH, T, Ab, Q, Ta, Bh = b["dH"], b["T"], b["Ab"], b["Q"], b["Ta"], b["Bh"]
    t1 = -np.einsum("ab,cb,cd,dm,as->ms", Xh, dH, Xh, T, Ab)
    t2 = np.einsum("ab,bm,as->ms", Xh, Q, Ab)
    t3 = np.einsum("ab,bm,cd,da,cs->ms", Xh, T, Xh, Ta, Ab)
    t4 = np.einsum("ab,bm,cd,ds,ca->ms", Xh, T, Xh, T, Bh)
    terms = [t1, t2, t3, t4, t1.T, t2.T, t3.T, t4.T]
    return sum(terms), terms


@dataclass(frozen=True)
class FifthReport:
    residual: float
    per_j: tuple[float, ...]


def fifth_identity(chart: AdaptedChart) -> FifthReport:
    """Compare ``u_{j j mbar sbar jbar}`` from the jet with :func:`fifth_rhs`."""
    if chart.order < 5:
        raise OrderExceeded(5, chart.order)
    r, p = chart.r, chart.p
    per = []
    for j in range(r):
        rhs, terms = fifth_rhs(chart, j)
        worst = 0.0
        for m in range(p):
            for s in range(p):
                lhs = _u(chart, [j, j], [r + m, r + s, j])
                scale = max([1.0, abs(lhs), abs(rhs[m, s])] + [abs(t[m, s]) for t in terms])
                worst = max(worst, abs(lhs - rhs[m, s]) / scale)
        per.append(worst)
    return FifthReport(max(per, default=0.0), tuple(per))


# curvature of the leafwise metric ----------------------------------------------


@dataclass(frozen=True)
class GapReport:
    j: int
    S_value: float
    logS_laplacian: float | None = None
    gap: float | None = None
    equality_residual: float | None = None
    Sj_residual: float | None = None
    Sjj_residual: float | None = None
    skipped: bool = False

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def S_jet(chart: AdaptedChart, j: int, tol: Tolerances = config.DEFAULT) -> WJet:
    """Jet (order ``K - 3``) of ``S = sum H^{l mbar} H^{r sbar} u_{mbar j sbar} u_{l jbar r}``."""
    n, r, p = chart.n, chart.r, chart.p
    J = chart.jet
    K3 = J.order - 3
    _, _, Hinv, _ = frame_jets(J, p, tol.near_zero)
    Xh = [[Hinv[b][a].truncate(K3) for b in range(p)] for a in range(p)]
    T = [[J.shift(MultiIndex.of(n, holo=[j], anti=[r + m, r + s])) for s in range(p)] for m in range(p)]
    R = [[J.shift(MultiIndex.of(n, holo=[r + l, r + q], anti=[j])) for q in range(p)] for l in range(p)]
    total = WJet.constant(n, K3, 0.0, J.center)
    for l in range(p):
        for m in range(p):
            for q in range(p):
                for s in range(p):
                    total = total + Xh[l][m] * Xh[q][s] * T[m][s] * R[l][q]
    return total


def curvature_gap(chart: AdaptedChart, j: int, tol: Tolerances = config.DEFAULT,
                  strict: bool = False) -> GapReport:
    """``[log S]_{j jbar} - (2/p) S`` at the center for leaf direction ``j``.

    Also checks the closed forms of the first derivative
    ``S_j = sum H H u_{l jbar r} u_{j j mbar sbar}`` and of ``S_{j jbar}``
    against the jet of ``S``. Below ``tol.gap_threshold`` the logarithm is
    not taken: the report is marked skipped, or ``SkippedLowS`` is raised
    when ``strict``.
    """
    if chart.order < 5:
        raise OrderExceeded(5, chart.order)
    n, r, p = chart.n, chart.r, chart.p
    Sj = S_jet(chart, j, tol)
    S0 = Sj.value.real
    if not S0 > tol.gap_threshold:
        if strict:
            raise SkippedLowS(S0, tol.gap_threshold)
        return GapReport(j, S0, skipped=True)
    lap = jet_apply("log", Sj)[mixed(n, j, j)].real
    gap = lap - (2.0 / p) * S0
    eq = abs(lap - 2.0 * S0) if p == 1 else None

    Xh = np.linalg.inv(_normal_block(chart)).T
    b = _third_blocks(chart, j)
    T, Q, Bh, Qb = b["T"], b["Q"], b["Bh"], b["Qb"]
    sj_formula = np.einsum("lm,qs,lq,ms->", Xh, Xh, Bh, Q)
    sj_jet = Sj[MultiIndex.of(n, holo=[j])]
    sjj_formula = np.einsum("lm,qs,ms,lq->", Xh, Xh, Q, Qb) + 2 * np.einsum(
        "lm,qs,ab,cd,ms,bd,la,qc->", Xh, Xh, Xh, Xh, T, T, Bh, Bh
    )
    sjj_jet = Sj[mixed(n, j, j)]
    return GapReport(
        j, S0, lap, gap, eq,
        _rel(sj_jet, sj_formula), _rel(sjj_jet, sjj_formula),
    )


def trace_inequality(A, p: int | None = None) -> float:
    """``tr((A* A)^2) - tr(A* A)^2 / p``; non-negative for every ``p x p`` matrix."""
    A = np.asarray(A, dtype=complex)
    p = A.shape[0] if p is None else p
    G = A.conj().T @ A
    return float(np.trace(G @ G).real - np.trace(G).real ** 2 / p)


# comparing potentials -------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonReport:
    points: tuple
    lambdas: tuple[float, ...]
    leafwise_derivative_residual: float
    max_angle: float


def compare_potentials(u_spec: PotentialSpec, v_spec: PotentialSpec, p: int, points,
                       order: int = config.DEFAULT_ORDER, tol: Tolerances = config.DEFAULT,
                       angle_tol: float = 1e-6) -> ComparisonReport:
    """Ratio ``lambda = det H_v / det H_u`` of two potentials for one foliation.

    ``(dd^c v)^p = lambda (dd^c u)^p`` on the normal directions, so ``v = 3u``
    gives ``lambda = 3``. Both are read in the chart adapted to ``u``;
    ``lambda`` must be positive and constant along the leaves.
    """
    if u_spec.n != v_spec.n:
        raise ValueError("potentials live in different dimensions")
    u_spec = u_spec.with_codim(p)
    v_spec = v_spec.with_codim(p)
    lams, worst, max_angle = [], 0.0, 0.0
    pts = []
    for q in points:
        q = tuple(complex(x) for x in q)
        chart = adapt_chart(u_spec, q, order, tol)
        n, r = chart.n, chart.r
        v_spec.check_guards(q)
        lv = levi_matrix(eval_jet(v_spec.expr, q, 2), tol.rank)
        if lv.rank != p:
            raise NotSameFoliation(float("inf"))
        ang = float(np.max(subspace_angles(chart.levi.eigenvectors[:, :r], lv.eigenvectors[:, :r])))
        max_angle = max(max_angle, ang)
        if ang > angle_tol:
            raise NotSameFoliation(ang)
        vj = eval_jet(v_spec.expr, q, order, _chart_variables(q, chart.U, chart.leaf_map, order))
        dets = []
        for J in (chart.jet, vj):
            Hj = [[J.shift(mixed(n, r + a, r + b)) for b in range(p)] for a in range(p)]
            dets.append(jet_det(Hj, tol.near_zero))
        lam = dets[1] / dets[0]
        lv0 = lam.value.real
        lams.append(lv0)
        pts.append(q)
        for j in range(r):
            for d in (MultiIndex.of(n, holo=[j]), MultiIndex.of(n, anti=[j])):
                worst = max(worst, abs(lam[d]) / (1 + abs(lv0)))
    return ComparisonReport(tuple(pts), tuple(lams), worst, max_angle)
