"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`FoliationError`; the CLI maps the families onto exit codes.
"""


class FoliationError(Exception):
    """Base class."""


class EvaluationError(FoliationError):
    """A jet or expression could not be evaluated at the requested point."""


class DivisionByNearZero(EvaluationError):
    def __init__(self, magnitude: float):
        super().__init__(f"division by near-zero constant term (|c0| = {magnitude:.3e})")
        self.magnitude = magnitude


class LogAtZero(EvaluationError):
    def __init__(self, magnitude: float):
        super().__init__(f"log of near-zero constant term (|c0| = {magnitude:.3e})")
        self.magnitude = magnitude


class OrderExceeded(EvaluationError):
    def __init__(self, needed: int, available: int):
        super().__init__(f"derivative order {needed} exceeds jet order {available}")
        self.needed = needed
        self.available = available


class GuardViolated(EvaluationError):
    def __init__(self, point, guard: str):
        super().__init__(f"domain guard {guard!r} is not positive at {point}")
        self.point = point
        self.guard = guard


class ParseError(FoliationError):
    def __init__(self, position: int, expected, text: str = ""):
        exp = ", ".join(sorted(expected))
        super().__init__(f"parse error at position {position}: expected one of {{{exp}}}")
        self.position = position
        self.expected = frozenset(expected)
        self.text = text


class UnknownVariable(FoliationError):
    def __init__(self, k: int, n: int):
        super().__init__(f"variable z{k} is out of range for n = {n}")
        self.k = k
        self.n = n


class BadCodimension(FoliationError):
    def __init__(self, p: int, n: int):
        super().__init__(f"codimension p = {p} must satisfy 1 <= p <= n - 1 (n = {n})")
        self.p = p
        self.n = n


class RankMismatch(FoliationError):
    def __init__(self, found: int, declared: int):
        super().__init__(f"Levi rank {found} differs from declared codimension {declared}")
        self.found = found
        self.declared = declared


class NotPlurisubharmonic(FoliationError):
    def __init__(self, eigenvalue: float):
        super().__init__(f"Levi matrix has negative eigenvalue {eigenvalue:.3e}")
        self.eigenvalue = eigenvalue


class IllConditionedH(EvaluationError):
    def __init__(self, cond: float):
        super().__init__(f"normal Levi block is ill-conditioned (cond = {cond:.3e})")
        self.cond = cond


class RankDeficient(EvaluationError):
    def __init__(self, point, smallest: float):
        super().__init__(f"frame rows are dependent at {point} (sigma_min = {smallest:.3e})")
        self.point = point
        self.smallest = smallest


class NotRealValued(EvaluationError):
    def __init__(self, point, defect: float):
        super().__init__(f"potential is not real at {point} (|Im u| / (1 + |u|) = {defect:.3e})")
        self.point = point
        self.defect = defect


class SkippedLowS(FoliationError):
    def __init__(self, value: float, threshold: float):
        super().__init__(f"S = {value:.3e} is below the threshold {threshold:.1e}")
        self.value = value
        self.threshold = threshold


class NotSameFoliation(FoliationError):
    def __init__(self, angle: float):
        super().__init__(f"Levi kernels differ (largest principal angle {angle:.3e})")
        self.angle = angle


class UnknownEntry(FoliationError, KeyError):
    def __init__(self, name: str):
        super().__init__(f"no catalog entry named {name!r}")
        self.name = name

    def __str__(self):
        return self.args[0]
