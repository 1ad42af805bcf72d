"""Tolerances shared by every analysis, echoed into every report."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    rank: float = 1e-8            # eigenvalue > rank * max eigenvalue counts toward the rank
    identity: float = 1e-8        # fourth-derivative and twist/Ricci identities
    fifth: float = 1e-7           # fifth-derivative identity, S_j / S_jjbar checks
    gap_threshold: float = 1e-8   # below this S the log-curvature is not evaluated
    near_zero: float = 1e-12      # jet division / log constant-term threshold
    cond_max: float = 1e8         # largest admissible condition number of H
    frame_rank: float = 1e-10     # smallest admissible frame singular value
    leaf_straighten: float = 1e-13

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **kw) -> "Tolerances":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


DEFAULT = Tolerances()
DEFAULT_ORDER = 5
