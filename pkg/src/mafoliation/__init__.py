"""Jets, leaf-adapted charts, twist and normal-bundle curvature of
Monge-Ampere foliations, with numerical checks of their identities."""

from .analysis import analyze, analyze_frame, scan
from .catalog import CATALOG, catalog_get, run_expectations
from .config import DEFAULT, DEFAULT_ORDER, Tolerances
from .curvature import (
    compare_potentials,
    curvature_gap,
    fifth_identity,
    fourth_identity,
    ricci_matrix,
    trace_inequality,
    twist_ricci_identity,
)
from .dsl import eval_jet, load_spec, parse_frame, parse_potential
from .errors import FoliationError
from .fdoracle import FDRequest, fd_oracle
from .foliation import (
    adapt_chart,
    build_frame,
    frobenius_residual,
    levi_matrix,
    ma_verify,
    twist_frame,
    twist_potential,
)
from .jets import MultiIndex, WJet, derivative_at, jet_apply, jet_arith, jet_shift

__version__ = "0.1.0"
