"""Truncated Taylor jets in Wirtinger variables.

A :class:`WJet` holds every partial derivative of a scalar function with
respect to ``z_1..z_n`` and ``zbar_1..zbar_n`` up to a fixed total order
``K``. The two families of variables are treated as independent (formal
Wirtinger calculus), so the jet of a real function is recognisable only
through the reality symmetry ``D^(a,b) u = conj(D^(b,a) u)``.

Stored values are raw derivatives ``D^alpha u(center)``, never Taylor
coefficients. Products and compositions convert internally to Taylor
coefficients (divide by ``alpha!``), multiply, and convert back, which is
the binomial-weighted Leibniz rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Iterable, Sequence

import numpy as np

from .errors import DivisionByNearZero, LogAtZero, OrderExceeded

NEAR_ZERO = 1e-12


@dataclass(frozen=True)
class MultiIndex:
    """Unordered record of derivative counts.

    ``holo[k]`` counts ``d/dz_k`` and ``anti[k]`` counts ``d/dzbar_k``.
    """

    holo: tuple[int, ...]
    anti: tuple[int, ...]

    def __post_init__(self):
        if len(self.holo) != len(self.anti):
            raise ValueError("holo and anti must have the same length")
        if any(c < 0 for c in self.holo + self.anti):
            raise ValueError("derivative counts must be non-negative")

    @classmethod
    def of(cls, n: int, holo: Iterable[int] = (), anti: Iterable[int] = ()) -> "MultiIndex":
        """Build from lists of 0-based variable positions, repeats allowed.

        ``MultiIndex.of(2, holo=[0], anti=[1, 1])`` is ``d^3/dz_1 dzbar_2^2``.
        """
        h = [0] * n
        a = [0] * n
        for k in holo:
            h[k] += 1
        for k in anti:
            a[k] += 1
        return cls(tuple(h), tuple(a))

    @classmethod
    def zero(cls, n: int) -> "MultiIndex":
        return cls((0,) * n, (0,) * n)

    @property
    def n(self) -> int:
        return len(self.holo)

    @property
    def order(self) -> int:
        return sum(self.holo) + sum(self.anti)

    @property
    def exps(self) -> tuple[int, ...]:
        return self.holo + self.anti

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        return MultiIndex(
            tuple(a + b for a, b in zip(self.holo, other.holo)),
            tuple(a + b for a, b in zip(self.anti, other.anti)),
        )

    def conj(self) -> "MultiIndex":
        return MultiIndex(self.anti, self.holo)


class _Layout:
    """Ranked monomials of total degree <= order in ``nvars`` variables."""

    def __init__(self, nvars: int, order: int):
        self.nvars = nvars
        self.order = order
        exps = []
        for d in range(order + 1):
            for combo in combinations_with_replacement(range(nvars), d):
                e = [0] * nvars
                for v in combo:
                    e[v] += 1
                exps.append(tuple(e))
        self.exps = exps
        self.size = len(exps)
        self.index = {e: i for i, e in enumerate(exps)}
        self.degree = np.array([sum(e) for e in exps])
        self.fact = np.array(
            [math.prod(math.factorial(c) for c in e) for e in exps], dtype=float
        )
        ii, jj, kk = [], [], []
        for i, ei in enumerate(exps):
            room = order - sum(ei)
            for j, ej in enumerate(exps):
                if sum(ej) > room:
                    break
                ii.append(i)
                jj.append(j)
                kk.append(self.index[tuple(a + b for a, b in zip(ei, ej))])
        self.mul_i = np.array(ii, dtype=np.intp)
        self.mul_j = np.array(jj, dtype=np.intp)
        self.mul_k = np.array(kk, dtype=np.intp)
        half = nvars // 2
        self.conj_perm = np.array(
            [self.index[e[half:] + e[:half]] for e in exps], dtype=np.intp
        )

    def taylor_mul(self, ta: np.ndarray, tb: np.ndarray) -> np.ndarray:
        prod = ta[self.mul_i] * tb[self.mul_j]
        re = np.bincount(self.mul_k, weights=prod.real, minlength=self.size)
        im = np.bincount(self.mul_k, weights=prod.imag, minlength=self.size)
        return re + 1j * im


@lru_cache(maxsize=None)
def _layout(n: int, order: int) -> _Layout:
    return _Layout(2 * n, order)


@lru_cache(maxsize=None)
def _shift_map(n: int, order: int, exps: tuple[int, ...]) -> np.ndarray:
    src = _layout(n, order)
    dst = _layout(n, order - sum(exps))
    return np.array(
        [src.index[tuple(a + b for a, b in zip(e, exps))] for e in dst.exps],
        dtype=np.intp,
    )


@lru_cache(maxsize=None)
def _truncate_map(n: int, order: int, new_order: int) -> np.ndarray:
    src = _layout(n, order)
    return np.array([src.index[e] for e in _layout(n, new_order).exps], dtype=np.intp)


class WJet:
    """Jet of a scalar function of ``(z, zbar)`` at a point.

    Parameters
    ----------
    n : int
        Number of complex variables.
    order : int
        Truncation order ``K``.
    coeffs : array_like
        Raw derivatives, one per ranked multi-index (see :meth:`indices`).
    center : sequence of complex, optional
        The expansion point, kept for bookkeeping only.
    """

    __slots__ = ("n", "order", "coeffs", "center")

    def __init__(self, n: int, order: int, coeffs, center: Sequence[complex] | None = None):
        lay = _layout(n, order)
        c = np.asarray(coeffs, dtype=complex)
        if c.shape != (lay.size,):
            raise ValueError(f"expected {lay.size} coefficients, got {c.shape}")
        c = c.copy()
        c.flags.writeable = False
        self.n = n
        self.order = order
        self.coeffs = c
        self.center = tuple(complex(z) for z in center) if center is not None else (0j,) * n

    # construction ---------------------------------------------------------

    @classmethod
    def constant(cls, n: int, order: int, value: complex, center=None) -> "WJet":
        c = np.zeros(_layout(n, order).size, dtype=complex)
        c[0] = value
        return cls(n, order, c, center)

    @classmethod
    def variable(cls, n: int, order: int, k: int, center: Sequence[complex], conj: bool = False) -> "WJet":
        """Jet of ``z_k`` (or ``zbar_k`` when ``conj``) at ``center``."""
        center = tuple(complex(z) for z in center)
        c = np.zeros(_layout(n, order).size, dtype=complex)
        c[0] = center[k].conjugate() if conj else center[k]
        if order >= 1:
            c[1 + k + (n if conj else 0)] = 1.0
        return cls(n, order, c, center)

    @classmethod
    def from_taylor(cls, n: int, order: int, taylor, center=None) -> "WJet":
        return cls(n, order, np.asarray(taylor) * _layout(n, order).fact, center)

    @staticmethod
    def indices(n: int, order: int) -> list[MultiIndex]:
        """Multi-indices in storage order."""
        return [MultiIndex(e[:n], e[n:]) for e in _layout(n, order).exps]

    # access ---------------------------------------------------------------

    @property
    def value(self) -> complex:
        return complex(self.coeffs[0])

    @property
    def taylor(self) -> np.ndarray:
        return self.coeffs / _layout(self.n, self.order).fact

    def __getitem__(self, idx: MultiIndex) -> complex:
        return derivative_at(self, idx)

    def _like(self, coeffs) -> "WJet":
        return WJet(self.n, self.order, coeffs, self.center)

    def _check(self, other: "WJet"):
        if other.n != self.n or other.order != self.order:
            raise ValueError(
                f"jet shapes differ: (n={self.n}, K={self.order}) vs (n={other.n}, K={other.order})"
            )

    def _coerce(self, other) -> "WJet":
        if isinstance(other, WJet):
            self._check(other)
            return other
        return WJet.constant(self.n, self.order, complex(other), self.center)

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        return self._like(self.coeffs + self._coerce(other).coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        return self._like(self.coeffs - self._coerce(other).coeffs)

    def __rsub__(self, other):
        return self._like(self._coerce(other).coeffs - self.coeffs)

    def __neg__(self):
        return self._like(-self.coeffs)

    def __mul__(self, other):
        if not isinstance(other, WJet):
            return self._like(self.coeffs * complex(other))
        self._check(other)
        lay = _layout(self.n, self.order)
        return self._like(lay.taylor_mul(self.taylor, other.taylor) * lay.fact)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, WJet):
            return self._like(self.coeffs / complex(other))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k: int):
        return jet_apply("intpow", self, k)

    def conj(self) -> "WJet":
        perm = _layout(self.n, self.order).conj_perm
        return self._like(np.conj(self.coeffs[perm]))

    def reciprocal(self, eps: float = NEAR_ZERO) -> "WJet":
        a0 = self.value
        _guard_near_zero(self, eps, DivisionByNearZero)
        d = [(-1) ** k * math.factorial(k) / a0 ** (k + 1) for k in range(self.order + 1)]
        return _compose(self, d)

    def truncate(self, order: int) -> "WJet":
        if order > self.order:
            raise OrderExceeded(order, self.order)
        if order == self.order:
            return self
        return WJet(self.n, order, self.coeffs[_truncate_map(self.n, self.order, order)], self.center)

    def derivative(self, idx: MultiIndex) -> complex:
        return derivative_at(self, idx)

    def shift(self, idx: MultiIndex) -> "WJet":
        return jet_shift(self, idx)

    def reality_defect(self) -> float:
        """Largest ``|D^(a,b) - conj(D^(b,a))|`` over stored coefficients."""
        perm = _layout(self.n, self.order).conj_perm
        return float(np.max(np.abs(self.coeffs - np.conj(self.coeffs[perm]))))

    def __repr__(self):
        nz = int(np.count_nonzero(np.abs(self.coeffs) > 0))
        return f"WJet(n={self.n}, order={self.order}, value={self.value:.6g}, nonzero={nz})"


def _guard_near_zero(a: WJet, eps: float, exc):
    a0 = abs(a.coeffs[0])
    scale = max(1.0, float(np.max(np.abs(a.coeffs[1:]), initial=0.0)))
    if a0 <= eps * scale:
        raise exc(a0)


def _compose(a: WJet, derivs: Sequence[complex]) -> WJet:
    """``f(a)`` from ``f^(k)(a.value)`` for ``k = 0..K`` (Horner in the nilpotent part)."""
    lay = _layout(a.n, a.order)
    h = a.taylor.copy()
    h[0] = 0.0
    K = a.order
    acc = np.zeros(lay.size, dtype=complex)
    acc[0] = derivs[K] / math.factorial(K)
    for k in range(K - 1, -1, -1):
        acc = lay.taylor_mul(acc, h)
        acc[0] += derivs[k] / math.factorial(k)
    return WJet(a.n, a.order, acc * lay.fact, a.center)


def jet_arith(a: WJet, b: WJet, op: str) -> WJet:
    """Pointwise ``add``, ``sub``, ``mul``, ``div`` or ``neg`` (``b`` ignored) of two jets."""
    if op == "neg":
        return -a
    a._check(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a * b.reciprocal()
    raise ValueError(f"unknown jet operation {op!r}")


def _intpow(a: WJet, k: int) -> WJet:
    if k < 0:
        return _intpow(a.reciprocal(), -k)
    result = WJet.constant(a.n, a.order, 1.0, a.center)
    base = a
    while k:
        if k & 1:
            result = result * base
        k >>= 1
        if k:
            base = base * base
    return result


def jet_apply(f: str, a: WJet, k: int | None = None) -> WJet:
    """Apply ``exp``, ``log``, ``re``, ``im``, ``conj`` or ``intpow`` (with exponent ``k``)."""
    if f == "conj":
        return a.conj()
    if f == "re":
        return (a + a.conj()) * 0.5
    if f == "im":
        return (a - a.conj()) * (1 / 2j)
    if f == "exp":
        e = np.exp(a.value)
        return _compose(a, [e] * (a.order + 1))
    if f == "log":
        _guard_near_zero(a, NEAR_ZERO, LogAtZero)
        a0 = a.value
        d = [np.log(a0)] + [
            (-1) ** (m + 1) * math.factorial(m - 1) / a0**m for m in range(1, a.order + 1)
        ]
        return _compose(a, d)
    if f == "intpow":
        if k is None:
            raise ValueError("intpow needs an integer exponent")
        return _intpow(a, int(k))
    raise ValueError(f"unknown jet function {f!r}")


def derivative_at(jet: WJet, idx: MultiIndex) -> complex:
    """The stored raw partial derivative ``D^idx u(center)``."""
    if idx.order > jet.order:
        raise OrderExceeded(idx.order, jet.order)
    return complex(jet.coeffs[_layout(jet.n, jet.order).index[idx.exps]])


def jet_shift(jet: WJet, idx: MultiIndex) -> WJet:
    """Jet of the derivative function ``D^idx u``, of order ``K - |idx|``."""
    if idx.order > jet.order:
        raise OrderExceeded(idx.order, jet.order)
    if idx.order == 0:
        return jet
    m = _shift_map(jet.n, jet.order, idx.exps)
    return WJet(jet.n, jet.order - idx.order, jet.coeffs[m], jet.center)


# matrices of jets -----------------------------------------------------------


def jet_matrix_inverse(mat: Sequence[Sequence[WJet]], eps: float = NEAR_ZERO) -> list[list[WJet]]:
    """Gauss-Jordan inverse of a square matrix of jets.

    Pivots are chosen by largest constant term; the jet ring admits the
    division exactly when that term is invertible.
    """
    p = len(mat)
    a = [list(row) for row in mat]
    proto = a[0][0]
    inv = [
        [WJet.constant(proto.n, proto.order, 1.0 if i == j else 0.0, proto.center) for j in range(p)]
        for i in range(p)
    ]
    for col in range(p):
        piv = max(range(col, p), key=lambda r: abs(a[r][col].value))
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        r = a[col][col].reciprocal(eps)
        a[col] = [x * r for x in a[col]]
        inv[col] = [x * r for x in inv[col]]
        for row in range(p):
            if row == col:
                continue
            f = a[row][col]
            if not np.any(f.coeffs):
                continue
            a[row] = [x - f * y for x, y in zip(a[row], a[col])]
            inv[row] = [x - f * y for x, y in zip(inv[row], inv[col])]
    return inv


def jet_det(mat: Sequence[Sequence[WJet]], eps: float = NEAR_ZERO) -> WJet:
    """Determinant by elimination with constant-term pivoting."""
    p = len(mat)
    a = [list(row) for row in mat]
    det = WJet.constant(a[0][0].n, a[0][0].order, 1.0, a[0][0].center)
    for col in range(p):
        piv = max(range(col, p), key=lambda r: abs(a[r][col].value))
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        d = a[col][col]
        det = det * d
        r = d.reciprocal(eps)
        for row in range(col + 1, p):
            f = a[row][col] * r
            a[row] = [x - f * y for x, y in zip(a[row], a[col])]
    return det


def values(mat: Sequence[Sequence[WJet]]) -> np.ndarray:
    """Constant terms of a matrix of jets."""
    return np.array([[x.value for x in row] for row in mat], dtype=complex)
