"""Per-point analysis pipeline and its serializable reports.

Reports are plain nested dicts ready for :func:`to_json`. Complex numbers
are written as ``[re, im]`` pairs, arrays as nested lists, and floats keep
their full ``repr`` precision.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import config
from .config import Tolerances
from .curvature import (
    curvature_gap,
    fifth_identity,
    fourth_identity,
    ricci_matrix,
    twist_ricci_identity,
)
from .dsl import Box, FrameSpec, PotentialSpec, eval_jet, evaluate, parse_expr, real_defect, spec_hash
from .errors import EvaluationError, FoliationError, NotRealValued, RankMismatch
from .foliation import (
    adapt_chart,
    build_frame,
    frobenius_residual,
    graph_frame_vectors,
    levi_matrix,
    ma_verify,
    twist_frame,
    twist_from_jet,
    twist_potential,
)

SCHEMA_VERSION = "mafoliation-report/1"

REAL_TOL = 1e-9  # |Im u| <= REAL_TOL * (1 + |u|)

OK, RANK_MISMATCH, SKIPPED, NON_INTEGRABLE = "ok", "rank-mismatch", "skipped", "non-integrable"


def encode(x):
    """JSON-ready copy of ``x``: complex -> [re, im], arrays -> lists."""
    if isinstance(x, dict):
        return {str(k): encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [encode(v) for v in x]
    if isinstance(x, np.ndarray):
        return encode(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return v if math.isfinite(v) else repr(v)
    return x


def to_json(doc: dict) -> str:
    return json.dumps(encode(doc), indent=2) + "\n"


def _point(q) -> list:
    return [complex(v) for v in q]


def _error_status(exc: Exception) -> str:
    return f"error({type(exc).__name__})"


# potentials ---------------------------------------------------------------------


def _graph_quantities(spec: PotentialSpec, q, chart, curv, tol: Tolerances) -> dict:
    """Twist and curvature in the frame ``e_a + B[a] e_normal`` of the original coordinates."""
    levi = chart.levi
    g = graph_frame_vectors(levi, chart.p, tol)
    if g is None:
        return {"available": False}
    r = chart.r
    out = {"available": True, "leaf_vectors": g}
    jet3 = eval_jet(spec.expr, q, 3)
    tw = twist_from_jet(jet3, chart.p, tol, basis="graph")
    out["twist"] = tw.C
    out["twist_norms"] = tw.norms
    if curv is not None:
        V = chart.to_chart(g)[:, :r]
        S = V @ curv.S_matrix @ V.conj().T
        out["S_matrix"] = S
        diag = np.real(np.diag(S))
        out["identity_residual"] = float(max(abs(s - t) / (1 + abs(s)) for s, t in zip(diag, tw.norms)))
    return out


def _references(spec, q, graph: dict) -> dict:
    out = {}
    for key, text in sorted(spec.reference.items()):
        ref = evaluate(parse_expr(text, spec.n), q)
        entry = {"expression": text, "value": ref}
        if key == "twist" and "twist" in graph:
            got = graph["twist"][0, 0, 0]
        elif key == "S" and "S_matrix" in graph:
            got = graph["S_matrix"][0, 0]
        else:
            got = None
        if got is not None:
            entry["computed"] = got
            entry["relative_error"] = abs(got - ref) / max(abs(ref), 1e-300)
        out[key] = entry
    return out


def analyze(spec: PotentialSpec, point, order: int = config.DEFAULT_ORDER,
            tol: Tolerances = config.DEFAULT, codim: int | None = None) -> dict:
    """Run the whole pipeline on a potential at one point.

    The report always comes back; failures are recorded in ``status``
    (``ok``, ``rank-mismatch``, ``skipped`` when ``order`` is too low for
    the curvature stages, or ``error(<kind>)``).
    """
    q = tuple(complex(v) for v in point)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "analysis",
        "input": {"spec_hash": spec_hash(spec), "potential": spec.text, "n": spec.n,
                  "point": _point(q), "p": spec.p if codim is None else codim, "order": order},
        "tolerances": tol.to_dict(),
        "status": OK,
    }
    try:
        spec.check_guards(q)
        defect = real_defect(spec.expr, q)
        if defect > REAL_TOL:
            raise NotRealValued(q, defect)
        levi = levi_matrix(eval_jet(spec.expr, q, 2), tol.rank)
        if codim is not None:
            if not 1 <= codim < spec.n:
                # an impossible codimension that the Levi rank also contradicts
                # is reported as the (more informative) rank mismatch
                found = ma_verify(levi, 1, tol.rank).rank
                if found != codim:
                    raise RankMismatch(found, codim)
            spec = spec.with_codim(codim)
        verdict = ma_verify(levi, spec.p, tol.rank)
        doc["levi"] = {"entries": levi.H_full, "eigenvalues": levi.eigenvalues, "rank": verdict.rank,
                       "degenerate": verdict.degenerate, "nondegenerate": verdict.nondegenerate,
                       "hermitian_defect": levi.hermitian_defect}
        chart = adapt_chart(spec, q, order, tol)
        r = chart.r
        frame = build_frame(chart, tol=tol)
        doc["chart"] = {"unitary": chart.U, "unitarity_defect": float(np.max(np.abs(chart.U.conj().T @ chart.U - np.eye(spec.n)))),
                        "cond_H": frame.cond, "block_defect": chart.block_defect(),
                        "straighten_residual": chart.straighten_residual,
                        "leaf_map_size": float(max((np.max(np.abs(m.taylor)) for m in chart.leaf_map), default=0.0))}
        doc["frame"] = {"Lambda": frame.Lam, "H": frame.H, "B": frame.B, "annihilation": frame.annihilation}
        if order < 3:
            doc["status"] = SKIPPED
            return doc
        tw = twist_potential(chart, tol)
        doc["twist"] = {"components": tw.C, "norms": tw.norms, "max": tw.max_abs}
        curv = None
        if order >= 4:
            curv = ricci_matrix(chart, tol)
            ident = twist_ricci_identity(chart, tw, curv)
            four = fourth_identity(chart)
            doc["curvature"] = {"S_matrix": curv.S_matrix, "S_closed": curv.S_closed,
                                "hermitian_defect": curv.hermitian_defect, "psd_margin": curv.psd_margin,
                                "route_residual": curv.route_residual, "identity_residual": ident.residual}
            doc["identities"] = {"fourth": four.residual, "fourth_vanishing": four.vanishing}
        graph = _graph_quantities(spec, q, chart, curv, tol)
        doc["graph_frame"] = graph
        if spec.reference:
            doc["reference"] = _references(spec, q, graph)
        if order >= 5:
            doc["identities"]["fifth"] = fifth_identity(chart).residual
            doc["gaps"] = [curvature_gap(chart, j, tol).to_dict() for j in range(r)]
        else:
            doc["status"] = SKIPPED
    except RankMismatch as exc:
        doc["status"] = RANK_MISMATCH
        doc["message"] = str(exc)
        doc["found_rank"] = exc.found
    except (EvaluationError, FoliationError, np.linalg.LinAlgError) as exc:
        doc["status"] = _error_status(exc)
        doc["message"] = str(exc)
    return doc


# digests and scans --------------------------------------------------------------

DIGEST_MAX = ("twist_max", "S_max", "identity_residual", "route_residual", "fourth", "fourth_vanishing",
              "fifth", "equality_residual", "Sj_residual", "Sjj_residual", "reference_twist", "reference_S",
              "graph_identity_residual", "block_defect", "frobenius")
DIGEST_MIN = ("psd_margin", "gap", "S_min")


def digest(doc: dict) -> dict:
    """Flat scalar summary of one report (absent entries are omitted)."""
    d = {"point": doc["input"]["point"], "status": doc["status"]}
    tw = doc.get("twist")
    if tw is not None:
        d["twist_max"] = tw["max"]
    ch = doc.get("chart")
    if ch is not None:
        d["block_defect"] = ch["block_defect"]
    cv = doc.get("curvature")
    if cv is not None:
        diag = np.real(np.diag(cv["S_matrix"]))
        d["S_max"] = float(np.max(np.abs(cv["S_matrix"])))
        d["S_min"] = float(np.min(diag))
        d["identity_residual"] = cv["identity_residual"]
        d["route_residual"] = cv["route_residual"]
        d["psd_margin"] = cv["psd_margin"]
    ids = doc.get("identities", {})
    for key in ("fourth", "fourth_vanishing", "fifth"):
        if key in ids:
            d[key] = ids[key]
    gaps = [g for g in doc.get("gaps", []) if not g["skipped"]]
    if gaps:
        d["gap"] = min(g["gap"] for g in gaps)
        d["Sj_residual"] = max(g["Sj_residual"] for g in gaps)
        d["Sjj_residual"] = max(g["Sjj_residual"] for g in gaps)
        eq = [g["equality_residual"] / g["S_value"] for g in gaps if g["equality_residual"] is not None]
        if eq:
            d["equality_residual"] = max(eq)
    g = doc.get("graph_frame", {})
    if "identity_residual" in g:
        d["graph_identity_residual"] = g["identity_residual"]
    for key, ref in doc.get("reference", {}).items():
        if "relative_error" in ref:
            d[f"reference_{key}"] = ref["relative_error"]
    if "frobenius_residual" in doc:
        d["frobenius"] = doc["frobenius_residual"]
    return d


def aggregate(digests: list[dict]) -> dict:
    agg = {}
    for key in DIGEST_MAX:
        vals = [d[key] for d in digests if key in d]
        if vals:
            agg[f"max_{key}"] = max(vals)
    for key in DIGEST_MIN:
        vals = [d[key] for d in digests if key in d]
        if vals:
            agg[f"min_{key}"] = min(vals)
    return agg


def sample_points(box: Box, seed: int, samples: int) -> list[tuple[complex, ...]]:
    """Uniform points in ``box``; point ``i`` uses its own child stream, so
    the list does not depend on how many points are drawn after it."""
    root = np.random.SeedSequence(seed)
    pts = []
    lo_re = np.array([a for a, _ in box.re])
    hi_re = np.array([b for _, b in box.re])
    lo_im = np.array([a for a, _ in box.im])
    hi_im = np.array([b for _, b in box.im])
    for child in root.spawn(samples):
        rng = np.random.default_rng(child)
        x = rng.uniform(lo_re, hi_re)
        y = rng.uniform(lo_im, hi_im)
        pts.append(tuple(complex(a, b) for a, b in zip(x, y)))
    return pts


@dataclass
class ScanSummary:
    seed: int
    samples: int
    rejected: int
    digests: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(d["status"] in (OK, SKIPPED) for d in self.digests)

    def to_dict(self) -> dict:
        counts = {}
        for d in self.digests:
            counts[d["status"]] = counts.get(d["status"], 0) + 1
        return {"schema_version": SCHEMA_VERSION, "kind": "scan", "seed": self.seed,
                "samples": self.samples, "rejected": self.rejected, "analyzed": len(self.digests),
                "status_counts": dict(sorted(counts.items())), "aggregate": aggregate(self.digests),
                "points": self.digests}


def scan(spec, samples: int, seed: int = 0, order: int = config.DEFAULT_ORDER,
         tol: Tolerances = config.DEFAULT, codim: int | None = None) -> ScanSummary:
    """Analyze ``samples`` box points; guard violations are counted and skipped."""
    if spec.box is None:
        raise ValueError("the spec has no sampling box")
    out = ScanSummary(seed, samples, 0)
    for q in sample_points(spec.box, seed, samples):
        if not spec.guards_ok(q):
            out.rejected += 1
            continue
        if isinstance(spec, FrameSpec):
            doc = analyze_frame(spec, q, tol)
        else:
            doc = analyze(spec, q, order, tol, codim)
        out.digests.append(digest(doc))
    return out


# frames ---------------------------------------------------------------------------


def analyze_frame(spec: FrameSpec, point, tol: Tolerances = config.DEFAULT,
                  integrable_tol: float = 1e-10) -> dict:
    """Frobenius residual and twist of a frame field at one point."""
    q = tuple(complex(v) for v in point)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "frame",
        "input": {"spec_hash": spec_hash(spec), "frame": list(spec.row_text), "n": spec.n,
                  "point": _point(q), "p": spec.p},
        "tolerances": {**tol.to_dict(), "integrable": integrable_tol},
        "status": OK,
    }
    try:
        res = frobenius_residual(spec, q, tol)
        doc["frobenius_residual"] = res
        doc["integrable"] = res <= integrable_tol
        tw = twist_frame(spec, q, tol=tol)
        doc["twist"] = {"components": tw.C, "max": tw.max_abs}
        if not doc["integrable"]:
            doc["status"] = NON_INTEGRABLE
    except (EvaluationError, FoliationError, np.linalg.LinAlgError) as exc:
        doc["status"] = _error_status(exc)
        doc["message"] = str(exc)
    return doc
