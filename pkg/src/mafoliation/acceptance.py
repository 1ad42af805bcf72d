"""The acceptance suite: fourteen pass/fail criteria over the catalog.

Every criterion takes a seed and a catalog (so a deliberately broken
catalog can be checked to fail) and returns a :class:`Criterion` whose
``detail`` holds the measured worst case next to its bound. Nothing
time-dependent enters the output, so the rendered table is reproducible
byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import config
from .analysis import analyze, digest, sample_points
from .catalog import CATALOG, HOLOMORPHIC, catalog_get, potentials, twist_agreement
from .config import Tolerances
from .curvature import compare_potentials, trace_inequality
from .dsl import eval_jet, hp_evaluator, parse_potential
from .errors import FoliationError, NotPlurisubharmonic
from .fdoracle import fd_all
from .foliation import adapt_chart, frobenius_residual, levi_matrix, ma_verify, twist_potential
from .jets import WJet


@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{self.number:>2}  {self.name:<28} {'PASS' if self.passed else 'FAIL'}  {self.detail}"


def _points(entry, seed: int, tag: int, count: int, max_draw: int = 10):
    """``count`` guarded points of ``entry``'s box from the stream ``(seed, tag)``."""
    spec = entry.spec
    pts = [q for q in sample_points(spec.box, [seed, tag], count * max_draw) if spec.guards_ok(q)]
    return pts[:count]


def _e(x: float) -> str:
    return f"{x:.3e}"


def _fail_detail(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


# 1-3: jets and the Monge-Ampere conditions ----------------------------------------


def c1_oracle(seed: int, catalog: dict) -> Criterion:
    worst, where = 0.0, ""
    for entry in potentials(catalog):
        spec = entry.spec
        f = hp_evaluator(spec.expr)
        idx = list(WJet.indices(spec.n, 4))
        for q in _points(entry, seed, 1, 20):
            jet = eval_jet(spec.expr, q, 4)
            fd = fd_all(f, q, idx, h=1e-3, stencil=4)
            for m, v in zip(idx, fd):
                ad = jet[m]
                err = abs(ad - v) / max(abs(ad), 1.0)
                if err > worst:
                    worst, where = err, entry.name
    return Criterion(1, "AD-FD oracle agreement", worst <= 1e-6, f"max rel err {_e(worst)} ({where}) <= 1e-6")


def c2_reality(seed: int, catalog: dict) -> Criterion:
    worst = 0.0
    for entry in potentials(catalog):
        for q in _points(entry, seed, 2, 20):
            worst = max(worst, eval_jet(entry.spec.expr, q, config.DEFAULT_ORDER).reality_defect())
    return Criterion(2, "reality symmetry", worst <= 1e-12, f"max defect {_e(worst)} <= 1e-12")


def c3_rank(seed: int, catalog: dict, samples: int = 100) -> Criterion:
    worst_frac, worst_name, total = 1.0, "all entries", 0
    for entry in potentials(catalog):
        spec = entry.spec
        pts = _points(entry, seed, 3, samples)
        good = 0
        for q in pts:
            try:
                levi = levi_matrix(eval_jet(spec.expr, q, 2))
                good += ma_verify(levi, spec.p).rank == spec.p
            except NotPlurisubharmonic as exc:
                return Criterion(3, "degenerate MA verification", False, f"{entry.name}: {_fail_detail(exc)}")
        total += len(pts)
        frac = good / len(pts) if pts else 1.0
        if frac < worst_frac:
            worst_frac, worst_name = frac, entry.name
    return Criterion(3, "degenerate MA verification", worst_frac >= 0.95,
                     f"min rank=p fraction {worst_frac:.3f} ({worst_name}, {total} points) >= 0.95")


# 4-5: closed forms -------------------------------------------------------------------


def c4_holomorphic(seed: int, catalog: dict, samples: int = 100) -> Criterion:
    tw = S = 0.0
    try:
        for name in HOLOMORPHIC:
            entry = catalog_get(name, catalog)
            for q in _points(entry, seed, 4, samples):
                d = digest(analyze(entry.spec, q, 4))
                if d["status"] not in ("ok", "skipped"):
                    return Criterion(4, "holomorphic entries", False, f"{name}: status {d['status']}")
                tw = max(tw, d["twist_max"])
                S = max(S, d["S_max"])
    except FoliationError as exc:
        return Criterion(4, "holomorphic entries", False, _fail_detail(exc))
    return Criterion(4, "holomorphic entries", tw <= 1e-9 and S <= 1e-9,
                     f"max twist {_e(tw)}, max S {_e(S)} <= 1e-9")


def c5_halfplane(seed: int, catalog: dict, samples: int = 50) -> Criterion:
    entry = catalog_get("halfplane", catalog)
    spec = entry.spec
    try:
        chart = adapt_chart(spec, (1j, 0j), 3)
        at_i = abs(twist_potential(chart).C[0, 0, 0] - (-0.5j))
        worst = 0.0
        for q in _points(entry, seed, 5, samples):
            doc = analyze(spec, q, 4)
            ref = doc.get("reference", {})
            if "twist" not in ref or "S" not in ref:
                return Criterion(5, "halfplane closed forms", False, f"no reference values ({doc['status']})")
            worst = max(worst, ref["twist"]["relative_error"], ref["S"]["relative_error"])
    except FoliationError as exc:
        return Criterion(5, "halfplane closed forms", False, _fail_detail(exc))
    return Criterion(5, "halfplane closed forms", at_i <= 1e-9 and worst <= 1e-8,
                     f"|C(i,0) + i/2| {_e(at_i)} <= 1e-9, max rel err {_e(worst)} <= 1e-8")


# 6-10: curvature -------------------------------------------------------------------------


def _adapted_digests(catalog, names, seed, tag, count=20, order=5):
    for name in names:
        entry = catalog_get(name, catalog)
        for q in _points(entry, seed, tag, count):
            yield name, q, digest(analyze(entry.spec, q, order))


def c6_twist_ricci(seed: int, catalog: dict) -> Criterion:
    ident = route = 0.0
    psd_ok = True
    names = [e.name for e in potentials(catalog)]
    for name, q, d in _adapted_digests(catalog, names, seed, 6, order=4):
        if "identity_residual" not in d:
            return Criterion(6, "twist-Ricci identity", False, f"{name}: status {d['status']}")
        ident = max(ident, d["identity_residual"])
        route = max(route, d["route_residual"])
        psd_ok &= d["psd_margin"] >= -1e-10 * (1 + d["S_max"])
    ok = ident <= 1e-8 and route <= 1e-8 and psd_ok
    return Criterion(6, "twist-Ricci identity", ok,
                     f"identity {_e(ident)}, routes {_e(route)} <= 1e-8, PSD {'ok' if psd_ok else 'violated'}")


def c7_fourth(seed: int, catalog: dict) -> Criterion:
    res = van = 0.0
    names = [e.name for e in potentials(catalog)]
    for name, q, d in _adapted_digests(catalog, names, seed, 7, order=4):
        if "fourth" not in d:
            return Criterion(7, "fourth-derivative identity", False, f"{name}: status {d['status']}")
        res = max(res, d["fourth"])
        van = max(van, d["fourth_vanishing"])
    return Criterion(7, "fourth-derivative identity", res <= 1e-8 and van <= 1e-8,
                     f"residual {_e(res)}, vanishing clause {_e(van)} <= 1e-8")


def c8_fifth(seed: int, catalog: dict) -> Criterion:
    res = 0.0
    for name, q, d in _adapted_digests(catalog, ("halfplane", "halfplane3"), seed, 8):
        if "fifth" not in d:
            return Criterion(8, "fifth-derivative identity", False, f"{name}: status {d['status']}")
        res = max(res, d["fifth"])
    return Criterion(8, "fifth-derivative identity", res <= 1e-7, f"residual {_e(res)} <= 1e-7")


def c9_equality(seed: int, catalog: dict) -> Criterion:
    eq = sj = sjj = 0.0
    count = 0
    for name, q, d in _adapted_digests(catalog, ("halfplane",), seed, 9):
        if "equality_residual" not in d:
            return Criterion(9, "curvature equality (p=1)", False, f"no gap at {q} ({d['status']})")
        count += 1
        eq = max(eq, d["equality_residual"])
        sj = max(sj, d["Sj_residual"])
        sjj = max(sjj, d["Sjj_residual"])
    ok = count > 0 and eq <= 1e-6 and sj <= 1e-7 and sjj <= 1e-7
    return Criterion(9, "curvature equality (p=1)", ok,
                     f"|lapl log S - 2S|/S {_e(eq)} <= 1e-6, S_j {_e(sj)}, S_jjbar {_e(sjj)} <= 1e-7")


def c10_inequality(seed: int, catalog: dict) -> Criterion:
    gap, count = np.inf, 0
    for name, q, d in _adapted_digests(catalog, ("halfplane3",), seed, 10):
        if d["status"] != "ok":
            return Criterion(10, "curvature inequality (p=2)", False, f"status {d['status']} at {q}")
        if "gap" in d:
            count += 1
            gap = min(gap, d["gap"])
    ok = count > 0 and gap >= -1e-8
    return Criterion(10, "curvature inequality (p=2)", ok, f"min gap {_e(gap)} >= -1e-8 over {count} points")


# 11-13 --------------------------------------------------------------------------------------


def c11_trace(seed: int, catalog: dict) -> Criterion:
    rng = np.random.default_rng(np.random.SeedSequence([seed, 11]))
    worst, eq = np.inf, 0.0
    for p in (1, 2, 3, 4):
        for _ in range(1000):
            A = rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))
            worst = min(worst, trace_inequality(A, p))
        for _ in range(20):
            Q, _ = np.linalg.qr(rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p)))
            eq = max(eq, abs(trace_inequality(rng.uniform(0.5, 2.0) * Q, p)))
    return Criterion(11, "trace inequality", worst >= -1e-12 and eq <= 1e-12,
                     f"min margin {_e(worst)} >= -1e-12, unitary equality {_e(eq)} <= 1e-12")


def c12_lambda(seed: int, catalog: dict) -> Criterion:
    entry = catalog_get("halfplane", catalog)
    u = entry.spec
    text = entry.text[0]
    pts = _points(entry, seed, 12, 10)
    worst_lam = worst_res = 0.0
    try:
        for v_text, target in ((f"3*({text})", 3.0), (f"{text} + re(z1)", 1.0)):
            v = parse_potential(v_text, u.n, u.p, entry.guards)
            rep = compare_potentials(u, v, u.p, pts)
            worst_lam = max([worst_lam] + [abs(lam - target) / target for lam in rep.lambdas])
            worst_res = max(worst_res, rep.leafwise_derivative_residual)
    except FoliationError as exc:
        return Criterion(12, "lambda relation", False, _fail_detail(exc))
    ok = worst_lam <= 1e-9 and worst_res <= 1e-9
    return Criterion(12, "lambda relation", ok, f"lambda rel err {_e(worst_lam)}, leafwise {_e(worst_res)} <= 1e-9")


def c13_frames(seed: int, catalog: dict) -> Criterion:
    slope = catalog_get("slope-frame", catalog)
    bad = catalog_get("noninvolutive-frame", catalog)
    try:
        pts = _points(slope, seed, 13, 10)
        frob = max(frobenius_residual(slope.spec, q) for q in pts)
        agree = max(twist_agreement(q) for q in pts)
        flagged = min(frobenius_residual(bad.spec, q) for q in _points(bad, seed, 113, 20))
    except FoliationError as exc:
        return Criterion(13, "frame path", False, _fail_detail(exc))
    ok = frob <= 1e-10 and agree <= 1e-8 and flagged >= 0.5
    return Criterion(13, "frame path", ok,
                     f"slope residual {_e(frob)} <= 1e-10, twist agreement {_e(agree)} <= 1e-8, "
                     f"non-involutive min {_e(flagged)} >= 0.5")


# runner --------------------------------------------------------------------------------------

CRITERIA: tuple[Callable[[int, dict], Criterion], ...] = (
    c1_oracle, c2_reality, c3_rank, c4_holomorphic, c5_halfplane, c6_twist_ricci, c7_fourth,
    c8_fifth, c9_equality, c10_inequality, c11_trace, c12_lambda, c13_frames,
)


def _guarded(fn, number: int, seed: int, catalog: dict) -> Criterion:
    try:
        return fn(seed, catalog)
    except Exception as exc:  # a crash is a failed criterion, not a crashed suite
        return Criterion(number, fn.__name__, False, _fail_detail(exc))


def c14_determinism(seed: int, catalog: dict) -> Criterion:
    """Run two criteria twice and compare the rendered lines."""
    picks = ((5, c5_halfplane), (11, c11_trace))
    first = [_guarded(fn, i, seed, catalog).line() for i, fn in picks]
    again = [_guarded(fn, i, seed, catalog).line() for i, fn in picks]
    same = first == again
    return Criterion(14, "determinism", same, "repeated criteria render identically" if same else "output differs")


def run_all(seed: int = 0, catalog: dict | None = None, only: set[int] | None = None) -> list[Criterion]:
    cat = CATALOG if catalog is None else catalog
    out = [_guarded(fn, i, seed, cat) for i, fn in enumerate(CRITERIA, start=1) if only is None or i in only]
    if only is None or 14 in only:
        out.append(_guarded(c14_determinism, 14, seed, cat))
    return out


def render(results: list[Criterion], seed: int) -> str:
    lines = [f"acceptance suite (seed {seed})"]
    lines += [c.line() for c in results]
    failed = [str(c.number) for c in results if not c.passed]
    lines.append(f"{len(results) - len(failed)}/{len(results)} passed" + (f"; failing: {', '.join(failed)}" if failed else ""))
    return "\n".join(lines) + "\n"
