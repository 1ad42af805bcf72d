"""Built-in potentials and frames with their expected behaviour.

Reference values are DSL expressions evaluated at each sample, so the
expectations are checked across the whole sampling box rather than at a
few hand-picked points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import config
from .analysis import OK, SKIPPED, analyze, analyze_frame, digest, aggregate, sample_points
from .config import Tolerances
from .dsl import Box, FrameSpec, PotentialSpec, dump_spec, parse_frame, parse_potential
from .errors import UnknownEntry

HALFPLANE_TWIST = "-i/(2*im(z1))"
HALFPLANE_S = "1/(4*im(z1)^2)"


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    kind: str                      # "potential" or "frame"
    text: tuple[str, ...]          # one expression, or the frame rows
    n: int
    p: int
    guards: tuple[str, ...] = ()
    box: Box | None = None
    holomorphic: bool = True
    leaf_type: str = "parabolic"   # metadata only
    twist_bound: float | None = None
    reference: dict = field(default_factory=dict)
    integrable: bool = True
    frobenius_bound: float | None = None

    @property
    def spec(self) -> PotentialSpec | FrameSpec:
        if self.kind == "potential":
            return parse_potential(self.text[0], self.n, self.p, self.guards, self.box, self.reference)
        return parse_frame(self.text, self.n, self.guards, self.box, self.reference)

    def to_spec_file(self) -> dict:
        return dump_spec(self.spec, self.name)


def _hp_box(n: int) -> Box:
    re = ((-1.0, 1.0),) * n
    im = ((0.5, 2.0),) + ((-1.0, 1.0),) * (n - 1)
    return Box(re, im)


_ENTRIES = [
    CatalogEntry("linear", "potential", ("abs2(z2)",), 2, 1, box=Box.uniform(2), twist_bound=1e-9),
    CatalogEntry("graph", "potential", ("abs2(z2 - z1^2)",), 2, 1, box=Box.uniform(2), twist_bound=1e-9),
    CatalogEntry("graph3", "potential", ("abs2(z3 - z1*z2)",), 3, 1, box=Box.uniform(3), twist_bound=1e-9),
    CatalogEntry("product", "potential", ("abs2(z2) + abs2(z3)",), 3, 2, box=Box.uniform(3), twist_bound=1e-9),
    CatalogEntry("halfplane", "potential", ("im(z2)^2/im(z1)",), 2, 1, ("im(z1)",), _hp_box(2),
                 holomorphic=False, leaf_type="hyperbolic",
                 reference={"twist": HALFPLANE_TWIST, "S": HALFPLANE_S}),
    CatalogEntry("halfplane3", "potential", ("im(z2)^2/im(z1) + abs2(z3)",), 3, 2, ("im(z1)",), _hp_box(3),
                 holomorphic=False, leaf_type="hyperbolic",
                 reference={"twist": HALFPLANE_TWIST, "S": HALFPLANE_S}),
    CatalogEntry("slope-frame", "frame", ("1, (z2 - conj(z2))/(z1 - conj(z1))",), 2, 1, ("im(z1)",), _hp_box(2),
                 holomorphic=False, leaf_type="hyperbolic", integrable=True, frobenius_bound=1e-10),
    CatalogEntry("noninvolutive-frame", "frame", ("1, conj(z1)",), 2, 1, (), Box.uniform(2),
                 holomorphic=False, leaf_type="mixed", integrable=False, frobenius_bound=0.5),
]

CATALOG: dict[str, CatalogEntry] = {e.name: e for e in _ENTRIES}

HOLOMORPHIC = ("linear", "graph", "graph3", "product")


def catalog_get(name: str, catalog: dict | None = None) -> CatalogEntry:
    cat = CATALOG if catalog is None else catalog
    try:
        return cat[name]
    except KeyError:
        raise UnknownEntry(name) from None


def potentials(catalog: dict | None = None) -> list[CatalogEntry]:
    cat = CATALOG if catalog is None else catalog
    return [e for e in cat.values() if e.kind == "potential"]


# expectations -----------------------------------------------------------------------


@dataclass
class ExpectationReport:
    name: str
    seed: int
    samples: int
    rejected: int = 0
    passed: int = 0
    failures: list = field(default_factory=list)
    maxima: dict = field(default_factory=dict)

    @property
    def accepted(self) -> int:
        return self.samples - self.rejected

    @property
    def ok(self) -> bool:
        # vacuous pass when every sample was rejected or none were drawn
        return self.passed >= 0.95 * self.accepted

    def to_dict(self) -> dict:
        return {"name": self.name, "seed": self.seed, "samples": self.samples, "rejected": self.rejected,
                "passed": self.passed, "ok": self.ok, "failures": self.failures, "aggregate": self.maxima}


def _potential_failures(entry: CatalogEntry, d: dict, tol: Tolerances) -> list[str]:
    bad = []
    if d["status"] not in (OK, SKIPPED):
        return [f"status {d['status']}"]
    if entry.holomorphic:
        bound = entry.twist_bound or 1e-9
        if d.get("twist_max", 0.0) > bound:
            bad.append("twist")
        if d.get("S_max", 0.0) > bound:
            bad.append("S")
    for key in ("reference_twist", "reference_S"):
        if d.get(key, 0.0) > tol.identity:
            bad.append(key)
    checks = (("identity_residual", tol.identity), ("route_residual", tol.identity),
              ("fourth", tol.identity), ("fourth_vanishing", tol.identity), ("fifth", tol.fifth),
              ("Sj_residual", tol.fifth), ("Sjj_residual", tol.fifth))
    for key, bound in checks:
        if d.get(key, 0.0) > bound:
            bad.append(key)
    if d.get("psd_margin", 0.0) < -1e-10 * (1 + d.get("S_max", 0.0)):
        bad.append("psd_margin")
    if entry.p == 1 and d.get("equality_residual", 0.0) > 1e-6:
        bad.append("equality")
    if d.get("gap", 0.0) < -1e-8:
        bad.append("gap")
    return bad


def _frame_failures(entry: CatalogEntry, doc: dict) -> list[str]:
    res = doc.get("frobenius_residual")
    if res is None:
        return [f"status {doc['status']}"]
    if entry.integrable:
        return [] if res <= entry.frobenius_bound else ["frobenius"]
    return [] if res >= entry.frobenius_bound else ["frobenius"]


def run_expectations(name: str, seed: int = 0, samples: int = 20, *, catalog: dict | None = None,
                     order: int = config.DEFAULT_ORDER, tol: Tolerances = config.DEFAULT) -> ExpectationReport:
    """Sample ``samples`` box points and compare the pipeline with the entry's expectations.

    Guard violations are rejected and excluded; the entry passes when at
    least 95% of the remaining points meet every expectation.
    """
    entry = catalog_get(name, catalog)
    spec = entry.spec
    rep = ExpectationReport(name, seed, samples)
    digests = []
    for i, q in enumerate(sample_points(spec.box, seed, samples)):
        if not spec.guards_ok(q):
            rep.rejected += 1
            continue
        if entry.kind == "potential":
            d = digest(analyze(spec, q, order, tol))
            bad = _potential_failures(entry, d, tol)
        else:
            doc = analyze_frame(spec, q, tol, integrable_tol=entry.frobenius_bound if entry.integrable else 1e-10)
            d = digest(doc)
            bad = _frame_failures(entry, doc)
        digests.append(d)
        if bad:
            rep.failures.append({"index": i, "point": list(q), "failed": bad})
        else:
            rep.passed += 1
    rep.maxima = aggregate(digests)
    return rep


def twist_agreement(point, tol: Tolerances = config.DEFAULT) -> float:
    """Relative gap between the slope-frame twist and the halfplane potential's
    twist, both written in the frame's own leaf and normal vectors."""
    from .foliation import adapt_chart, normal_complement, twist_frame, twist_in_basis, twist_potential
    from .dsl import eval_jet

    frame = catalog_get("slope-frame").spec
    pot = catalog_get("halfplane").spec
    q = tuple(complex(v) for v in point)
    A = np.array([[eval_jet(e, q, 0).value for e in row] for row in frame.rows])
    W = normal_complement(A)
    tf = twist_frame(frame, q, W, tol)
    chart = adapt_chart(pot, q, 3, tol)
    tp = twist_in_basis(twist_potential(chart, tol), chart, A, W)
    return float(np.max(np.abs(tf.C - tp)) / max(1.0, float(np.max(np.abs(tf.C)))))
