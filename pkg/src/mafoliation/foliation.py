"""Levi form, leaf-adapted charts, tangent frames and the twist tensor.

Index conventions used throughout: a chart has ``r = n - p`` leaf
coordinates followed by ``p`` normal ones. ``H`` is the normal block
``H[l, m] = u_{l mbar}``, ``Lambda[j, m] = u_{j mbar}`` for leaf ``j`` and
normal ``m``, and the frame ``Z^j = d_j + sum_l B[j, l] d_l`` with
``B = -Lambda H^{-1}`` annihilates the Levi form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import config
from .config import Tolerances
from .dsl import FrameSpec, PotentialSpec, eval_jet
from .errors import (
    IllConditionedH,
    NotPlurisubharmonic,
    RankDeficient,
    RankMismatch,
)
from .jets import MultiIndex, WJet, _layout, jet_matrix_inverse, values


def mixed(n: int, j: int, k: int) -> MultiIndex:
    """``d^2 / dz_j dzbar_k`` (0-based)."""
    return MultiIndex.of(n, holo=[j], anti=[k])


# Levi form --------------------------------------------------------------


@dataclass(frozen=True)
class LeviData:
    H_full: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    rank: int
    hermitian_defect: float

    @property
    def n(self) -> int:
        return self.H_full.shape[0]


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Make each column's largest entry real positive (ties go to the lowest index)."""
    out = vecs.copy()
    for c in range(out.shape[1]):
        mags = np.abs(out[:, c])
        i = int(np.flatnonzero(mags >= mags.max() * (1 - 1e-9))[0])
        out[:, c] *= np.conj(out[i, c]) / abs(out[i, c])
    return out


def levi_matrix(jet: WJet, tol: float = config.DEFAULT.rank) -> LeviData:
    """Levi matrix ``u_{j kbar}`` at the jet center with its eigendecomposition."""
    if jet.order < 2:
        raise ValueError("the Levi matrix needs a jet of order >= 2")
    n = jet.n
    H = np.array([[jet[mixed(n, j, k)] for k in range(n)] for j in range(n)])
    defect = float(np.max(np.abs(H - H.conj().T)))
    # the form is sum u_{j kbar} v_j conj(v_k) = v^* H^T v, so tangent
    # eigenvectors are those of H^T
    w, v = np.linalg.eigh((H.T + H.conj()) / 2)
    v = _fix_phases(v)
    top = max(float(np.max(np.abs(w))), np.finfo(float).tiny)
    rank = int(np.sum(w > tol * top))
    return LeviData(H, w, v, rank, defect)


@dataclass(frozen=True)
class Verdict:
    rank: int
    degenerate: bool
    nondegenerate: bool


def ma_verify(levi: LeviData, p: int, tol: float = config.DEFAULT.rank) -> Verdict:
    """Pointwise ``(dd^c u)^{p+1} = 0`` (rank <= p) and ``(dd^c u)^p != 0`` (rank == p)."""
    w = levi.eigenvalues
    top = max(float(np.max(np.abs(w))), np.finfo(float).tiny)
    if w[0] < -tol * top:
        raise NotPlurisubharmonic(float(w[0]))
    rank = int(np.sum(w > tol * top))
    return Verdict(rank, rank <= p, rank == p)


# adapted charts --------------------------------------------------------------


@dataclass(frozen=True)
class AdaptedChart:
    """Holomorphic chart ``z = q + U (w', w'' + leaf_map(w'))`` around ``q``.

    The first ``n - p`` columns of ``U`` span the Levi kernel at ``q``.
    ``leaf_map`` is a holomorphic polynomial in the leaf coordinates,
    without constant or linear part, that bends the normal coordinates so
    the leaf through ``q`` is ``{w'' = 0}``; it is zero when that leaf is
    an affine subspace.
    """

    center: tuple[complex, ...]
    p: int
    U: np.ndarray
    jet: WJet
    levi: LeviData
    leaf_map: tuple[WJet, ...] = ()
    straighten_residual: float = 0.0
    spec: PotentialSpec | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.jet.n

    @property
    def r(self) -> int:
        return self.n - self.p

    @property
    def order(self) -> int:
        return self.jet.order

    @property
    def adapted_jet(self) -> WJet:
        return self.jet

    def to_chart(self, v) -> np.ndarray:
        """Chart components of ambient (1,0) vectors at the center."""
        return np.asarray(v, dtype=complex) @ self.U.conj()

    def block_defect(self) -> float:
        """Largest Levi entry outside the trailing ``p x p`` block."""
        n, r = self.n, self.r
        worst = 0.0
        for j in range(n):
            for k in range(n):
                if j < r or k < r:
                    worst = max(worst, abs(self.jet[mixed(n, j, k)]))
        return worst


def _chart_variables(center, U, leaf_map, order):
    n = len(center)
    r = n - len(leaf_map)
    w = [WJet.variable(n, order, k, (0j,) * n) for k in range(n)]
    out = []
    for k in range(n):
        zk = WJet.constant(n, order, center[k], (0j,) * n)
        for j in range(n):
            if U[k, j] != 0:
                zk = zk + w[j] * U[k, j]
        for l, phi in enumerate(leaf_map):
            if U[k, r + l] != 0:
                zk = zk + phi * U[k, r + l]
        out.append(zk)
    return out


def frame_jets(jet: WJet, p: int, eps: float = config.DEFAULT.near_zero):
    """Jets (order ``K - 2``) of ``Lambda``, ``H``, ``H^{-1}`` and ``B = -Lambda H^{-1}``."""
    n = jet.n
    r = n - p
    Lam = [[jet.shift(mixed(n, j, r + m)) for m in range(p)] for j in range(r)]
    H = [[jet.shift(mixed(n, r + l, r + m)) for m in range(p)] for l in range(p)]
    Hinv = jet_matrix_inverse(H, eps)
    B = [
        [-sum((Lam[j][s] * Hinv[s][l] for s in range(1, p)), Lam[j][0] * Hinv[0][l]) for l in range(p)]
        for j in range(r)
    ]
    return Lam, H, Hinv, B


def _holomorphic_leaf_part(jet: WJet, r: int):
    """Taylor coefficients of monomials in ``w_1..w_r`` only, and the largest
    coefficient on the leaf plane that involves some ``wbar``."""
    lay = _layout(jet.n, jet.order)
    t = jet.taylor
    n = jet.n
    holo = {}
    anti = 0.0
    for i, e in enumerate(lay.exps):
        if any(e[r:n]) or any(e[n + r:]):
            continue
        if any(e[n:n + r]):
            anti = max(anti, abs(t[i]))
        else:
            holo[e[:r]] = t[i]
    return holo, anti


def adapt_chart(spec: PotentialSpec, q, order: int = config.DEFAULT_ORDER,
                tol: Tolerances = config.DEFAULT, max_iter: int | None = None) -> AdaptedChart:
    """Leaf-adapted chart at ``q`` for the declared codimension of ``spec``.

    ``U`` comes from the Levi eigenvectors (kernel first). The leaf
    through ``q`` is then straightened by iterating: read the frame
    coefficients ``B`` on ``{w'' = 0}``, integrate their holomorphic part
    into a graph correction, and re-evaluate the potential under the new
    substitution. Each pass removes at least one more order of curvature.
    """
    q = tuple(complex(v) for v in q)
    n, p = spec.n, spec.p
    r = n - p
    spec.check_guards(q)
    base = eval_jet(spec.expr, q, 2)
    levi = levi_matrix(base, tol.rank)
    verdict = ma_verify(levi, p, tol.rank)
    if verdict.rank != p:
        raise RankMismatch(verdict.rank, p)
    U = levi.eigenvectors
    zero = (0j,) * n
    lay = _layout(n, order)
    leaf_map = tuple(WJet.constant(n, order, 0.0, zero) for _ in range(p))
    residual = 0.0
    max_iter = order + 1 if max_iter is None else max_iter
    for _ in range(max_iter + 1):
        jet = eval_jet(spec.expr, q, order, _chart_variables(q, U, leaf_map, order))
        if order < 3:
            break
        _, H, _, B = frame_jets(jet, p, tol.near_zero)
        scale = max(1.0, float(np.max(np.abs(values(H)))))
        parts = [[_holomorphic_leaf_part(b, r) for b in row] for row in B]
        residual = max(
            max((abs(c) for e, c in hp.items() if sum(e) > 0), default=0.0)
            for row in parts for hp, _ in row
        ) / scale
        if residual <= tol.leaf_straighten:
            break
        # psi_l(w') = sum_j w_j * sum_alpha t_{jl,alpha} w'^alpha / (|alpha| + 1)
        new_map = []
        for l in range(p):
            t = leaf_map[l].taylor.copy()
            for j in range(r):
                hp, _ = parts[j][l]
                for e, c in hp.items():
                    d = sum(e)
                    if d == 0 or d + 1 > order:
                        continue
                    g = list(e)
                    g[j] += 1
                    t[lay.index[tuple(g) + (0,) * (2 * n - r)]] += c / (d + 1)
            new_map.append(WJet.from_taylor(n, order, t, zero))
        leaf_map = tuple(new_map)
    return AdaptedChart(q, p, U, jet, levi, leaf_map, residual, spec)


# frames -----------------------------------------------------------------


@dataclass(frozen=True)
class FrameData:
    Lam: np.ndarray
    H: np.ndarray
    Hinv: np.ndarray
    B: np.ndarray
    cond: float
    annihilation: float

    @property
    def vectors(self) -> np.ndarray:
        """Rows ``(e_j, B[j])``: the frame ``Z^j`` at the center."""
        r = self.B.shape[0]
        return np.hstack([np.eye(r), self.B])


def build_frame(source, p: int | None = None, tol: Tolerances = config.DEFAULT) -> FrameData:
    """Annihilator frame ``Z^j = d_j + sum_l B[j,l] d_{n-p+l}`` from a chart or a jet."""
    if isinstance(source, AdaptedChart):
        jet, p = source.jet, source.p
    else:
        jet = source
        if p is None:
            raise ValueError("codimension p is required when building from a jet")
    n = jet.n
    r = n - p
    full = np.array([[jet[mixed(n, j, k)] for k in range(n)] for j in range(n)])
    Lam = full[:r, r:]
    H = full[r:, r:]
    cond = float(np.linalg.cond(H))
    if not np.isfinite(cond) or cond > tol.cond_max:
        raise IllConditionedH(cond)
    Hinv = np.linalg.inv(H)
    B = -Lam @ Hinv
    Z = np.hstack([np.eye(r), B])
    scale = max(float(np.max(np.abs(full))), np.finfo(float).tiny)
    annihilation = float(np.max(np.abs(Z @ full))) / scale
    return FrameData(Lam, H, Hinv, B, cond, annihilation)


# twist tensor -------------------------------------------------------------


@dataclass(frozen=True)
class TwistTensor:
    """``C[j, m, l]``: component of ``L(Z^j, dbar_m)`` along ``d_l`` (normal ``m, l``)."""

    C: np.ndarray
    norms: np.ndarray | None = None
    basis: str = "chart"

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.C), initial=0.0))


def twist_norms(C: np.ndarray, H: np.ndarray) -> np.ndarray:
    """``||L^j||^2 = tr(conj(H^-1) C_j H C_j^*)``: metric ``H`` on the normal
    bundle and ``conj(H)^-1`` on the conjugate-dual slot."""
    Xb = np.linalg.inv(H).conj()
    return np.array([np.trace(Xb @ Cj @ H @ Cj.conj().T).real for Cj in C])


def twist_from_jet(jet: WJet, p: int, tol: Tolerances = config.DEFAULT, basis: str = "chart") -> TwistTensor:
    """Twist from the frame coefficients: ``C[j,m,l] = -dbar_m B[j,l]``.

    Valid in any coordinates in which the normal block ``H`` is
    invertible, since ``[Z^j, dbar_m] = -sum_l (dbar_m B[j,l]) d_l`` is
    already normal to the frame.
    """
    if jet.order < 3:
        raise ValueError("the twist needs a jet of order >= 3")
    n = jet.n
    r = n - p
    _, H, _, B = frame_jets(jet, p, tol.near_zero)
    Hv = values(H)
    cond = float(np.linalg.cond(Hv))
    if not np.isfinite(cond) or cond > tol.cond_max:
        raise IllConditionedH(cond)
    C = np.zeros((r, p, p), dtype=complex)
    for j in range(r):
        for m in range(p):
            d = MultiIndex.of(n, anti=[r + m])
            for l in range(p):
                C[j, m, l] = -B[j][l][d]
    return TwistTensor(C, twist_norms(C, Hv), basis)


def twist_potential(chart: AdaptedChart, tol: Tolerances = config.DEFAULT) -> TwistTensor:
    """Twist tensor in the adapted chart, with per-leaf-direction norms."""
    return twist_from_jet(chart.jet, chart.p, tol, "chart")


def twist_on_leaf(chart: AdaptedChart) -> np.ndarray:
    """Center-only form ``C[j,m,l] = sum_s u_{j sbar mbar} (H^-1)[s,l]`` (valid where Lambda = 0)."""
    n, r, p = chart.n, chart.r, chart.p
    J = chart.jet
    H = np.array([[J[mixed(n, r + a, r + b)] for b in range(p)] for a in range(p)])
    X = np.linalg.inv(H)
    T = np.array([[[J[MultiIndex.of(n, holo=[j], anti=[r + s, r + m])] for s in range(p)]
                   for m in range(p)] for j in range(r)])
    return T @ X


def graph_frame_vectors(levi: LeviData, p: int, tol: Tolerances = config.DEFAULT) -> np.ndarray | None:
    """Ambient frame ``e_a + sum_l B[a,l] e_{n-p+l}`` in the original coordinates.

    ``None`` when the leaf is not a graph over the first ``n - p``
    coordinates (singular normal block).
    """
    n = levi.n
    r = n - p
    H = levi.H_full[r:, r:]
    cond = float(np.linalg.cond(H))
    if not np.isfinite(cond) or cond > tol.cond_max:
        return None
    B = -levi.H_full[:r, r:] @ np.linalg.inv(H)
    return np.hstack([np.eye(r), B])


def twist_in_basis(twist: TwistTensor, chart: AdaptedChart, leaf_vectors, normal_vectors) -> np.ndarray:
    """Re-express a chart twist in ambient bases at the chart center.

    ``leaf_vectors`` (``r x n``) span the leaf tangent; ``normal_vectors``
    (``p x n``) complete them. The output index ``l`` refers to
    ``normal_vectors[l]`` modulo the leaf.
    """
    r = chart.r
    X = chart.to_chart(leaf_vectors)[:, :r]
    Y = chart.to_chart(normal_vectors)[:, r:]
    out = np.einsum("aj,bm,jml->abl", X, Y.conj(), twist.C)
    # o = sum_l beta_l Y[l]  =>  beta = o @ inv(Y)
    return out @ np.linalg.inv(Y)


# frame input ---------------------------------------------------------------


def _frame_jets(frame: FrameSpec, q, tol: Tolerances):
    frame.check_guards(q)
    rows = [[eval_jet(e, q, 1) for e in row] for row in frame.rows]
    A = np.array([[x.value for x in row] for row in rows])
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] <= tol.frame_rank * max(1.0, s[0]):
        raise RankDeficient(tuple(q), float(s[-1]))
    n = frame.n
    dz = np.array([[[x[MultiIndex.of(n, holo=[i])] for i in range(n)] for x in row] for row in rows])
    dzb = np.array([[[x[MultiIndex.of(n, anti=[i])] for i in range(n)] for x in row] for row in rows])
    # dz[j, k, i] = d_i a_{jk}, dzb[j, k, i] = dbar_i a_{jk}
    return A, dz, dzb


def normal_complement(A: np.ndarray) -> np.ndarray:
    """Orthonormal complement (rows) of the row span of ``A`` in C^n."""
    r, n = A.shape
    Q, _ = np.linalg.qr(A.T, mode="complete")
    W = _fix_phases(Q[:, r:])
    return W.T


def twist_frame(frame: FrameSpec, q, normals=None, tol: Tolerances = config.DEFAULT) -> TwistTensor:
    """Twist of a frame field from the bracket ``[Z^j, conj(W_m)]`` modulo the frame.

    ``W_m`` are constant fields (default: orthonormal complement of the
    frame at ``q``), so the bracket is ``-sum_k conj(W_m)(a_{jk}) d_k``;
    it is decomposed in the basis ``{Z^1..Z^r, W_1..W_p}`` and the ``W``
    components are kept.
    """
    q = tuple(complex(v) for v in q)
    A, dz, dzb = _frame_jets(frame, q, tol)
    W = normal_complement(A) if normals is None else np.asarray(normals, dtype=complex)
    r, p = frame.r, frame.p
    basis = np.vstack([A, W])  # rows
    C = np.zeros((r, p, p), dtype=complex)
    for j in range(r):
        for m in range(p):
            v = -dzb[j] @ W[m].conj()
            coef = np.linalg.solve(basis.T, v)
            C[j, m] = coef[r:]
    return TwistTensor(C, None, "frame")


def frobenius_residual(frame: FrameSpec, q, tol: Tolerances = config.DEFAULT) -> float:
    """Largest part of ``[Z^j, Z^k]`` and ``[Z^j, conj(Z^k)]`` outside
    ``span{Z} + span{conj Z}``; zero exactly when the real distribution is involutive."""
    q = tuple(complex(v) for v in q)
    A, dz, dzb = _frame_jets(frame, q, tol)
    r = frame.r
    Q, _ = np.linalg.qr(A.T)  # orthonormal basis of span{Z} (columns)
    P = np.eye(frame.n) - Q @ Q.conj().T
    Pb = P.conj()  # projector off span{conj Z}

    def along(j, D, k):
        # Z^j applied to coefficient k, D[k, t, i] = d_i a_{kt}
        return D[k] @ A[j]

    worst = 0.0
    for j in range(r):
        for k in range(r):
            hol = along(j, dz, k) - along(k, dz, j)
            worst = max(worst, float(np.linalg.norm(P @ hol)))
            # [Z^j, conj Z^k] = Z^j(conj a_k) dbar - conj(Z^k)(a_j) d
            anti_part = dzb[k].conj() @ A[j]
            hol_part = -(dzb[j] @ A[k].conj())
            worst = max(worst, float(np.linalg.norm(Pb @ anti_part)), float(np.linalg.norm(P @ hol_part)))
    return worst
