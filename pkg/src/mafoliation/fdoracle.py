"""Central finite differences of Wirtinger derivatives.

This is the independent ground truth for :func:`jets.derivative_at`.
A Wirtinger operator ``prod (d/dz_k)^a (d/dzbar_k)^b`` is expanded into
real partials through ``d/dz = (d/dx - i d/dy)/2`` and
``d/dzbar = (d/dx + i d/dy)/2``; every real partial is a tensor product
of one-dimensional central stencils with exact rational weights.

Arithmetic runs in ``gmpy2`` multiprecision: a fourth derivative at
``h = 1e-3`` divides by ``h**4 = 1e-12``, which would leave only about four
correct digits in double precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import comb
from typing import Callable, Sequence

import gmpy2

from .jets import MultiIndex

MAX_ORDER = 4


@dataclass(frozen=True)
class FDRequest:
    target: MultiIndex
    h: float = 1e-3
    stencil: int = 4

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("step size must be positive")
        if self.stencil not in (2, 4):
            raise ValueError("stencil accuracy must be 2 or 4")
        if self.target.order > MAX_ORDER:
            raise ValueError(f"finite differences above order {MAX_ORDER} are not supported")


@lru_cache(maxsize=None)
def central_weights(m: int, accuracy: int) -> tuple[tuple[int, Fraction], ...]:
    """Offsets and exact weights of the central stencil for ``d^m/dx^m``.

    Solves the moment conditions ``sum_k w_k k^j = m! [j == m]`` over the
    symmetric offsets ``-P..P`` with ``P = (m - 1) // 2 + accuracy // 2``.
    """
    if m == 0:
        return ((0, Fraction(1)),)
    half = (m - 1) // 2 + accuracy // 2
    offs = list(range(-half, half + 1))
    size = len(offs)
    A = [[Fraction(k) ** j for k in offs] for j in range(size)]
    rhs = [Fraction(0)] * size
    fact = 1
    for i in range(2, m + 1):
        fact *= i
    rhs[m] = Fraction(fact)
    # exact Gaussian elimination
    for col in range(size):
        piv = next(r for r in range(col, size) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        rhs[col], rhs[piv] = rhs[piv], rhs[col]
        for r in range(size):
            if r != col and A[r][col] != 0:
                f = A[r][col] / A[col][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
                rhs[r] -= f * rhs[col]
    w = [rhs[i] / A[i][i] for i in range(size)]
    return tuple((k, wk) for k, wk in zip(offs, w) if wk != 0)


def wirtinger_to_real(idx: MultiIndex) -> dict[tuple[int, ...], complex]:
    """Expand a Wirtinger multi-index into real partials.

    Keys are exponent tuples over ``(x_1, y_1, ..., x_n, y_n)``.
    """
    per_var = []
    for a, b in zip(idx.holo, idx.anti):
        # (X - iY)^a (X + iY)^b / 2^(a+b)
        terms: dict[tuple[int, int], complex] = {}
        for s in range(a + 1):
            for t in range(b + 1):
                ys = (a - s) + (b - t)
                c = comb(a, s) * comb(b, t) * ((-1j) ** (a - s)) * ((1j) ** (b - t))
                key = (s + t, ys)
                terms[key] = terms.get(key, 0) + c / 2 ** (a + b)
        per_var.append({k: v for k, v in terms.items() if v != 0})
    out: dict[tuple[int, ...], complex] = {}
    for combo in product(*(d.items() for d in per_var)):
        key = tuple(e for (xy, _) in combo for e in xy)
        c = 1
        for _, v in combo:
            c *= v
        out[key] = out.get(key, 0) + c
    return {k: v for k, v in out.items() if abs(v) > 0}


class _Sampler:
    """Memoised evaluations on the integer lattice ``center + h * offsets``."""

    def __init__(self, evaluator: Callable, center: Sequence[complex], h: float, precision: int):
        self.f = evaluator
        self.ctx = gmpy2.context(precision=precision, real_prec=precision, imag_prec=precision)
        with gmpy2.context(self.ctx):
            self.center = [gmpy2.mpc(complex(c)) for c in center]
            self.h = gmpy2.mpfr(h)
        self.cache: dict[tuple[int, ...], object] = {}

    def __call__(self, offsets: tuple[int, ...]):
        v = self.cache.get(offsets)
        if v is None:
            with gmpy2.context(self.ctx):
                pt = []
                for k, c in enumerate(self.center):
                    ox, oy = offsets[2 * k], offsets[2 * k + 1]
                    if ox or oy:
                        pt.append(c + gmpy2.mpc(ox * self.h, oy * self.h))
                    else:
                        pt.append(c)
                v = self.f(pt)
            self.cache[offsets] = v
        return v


def _real_partial(sampler: _Sampler, exps: tuple[int, ...], accuracy: int):
    stencils = [central_weights(m, accuracy) for m in exps]
    active = [i for i, m in enumerate(exps) if m]
    with gmpy2.context(sampler.ctx):
        total = gmpy2.mpc(0)
        for combo in product(*(stencils[i] for i in active)):
            off = [0] * len(exps)
            w = Fraction(1)
            for i, (k, wk) in zip(active, combo):
                off[i] = k
                w *= wk
            total += gmpy2.mpq(w.numerator, w.denominator) * sampler(tuple(off))
        return total / sampler.h ** sum(exps)


def fd_oracle(evaluator: Callable, center: Sequence[complex], req: FDRequest,
              precision: int = 128, _sampler: _Sampler | None = None) -> complex:
    """Finite-difference estimate of ``D^target u(center)``.

    ``evaluator`` receives a list of ``gmpy2.mpc`` (see
    :func:`dsl.hp_evaluator`). No convergence judgement is made here;
    compare two step sizes if in doubt.
    """
    sampler = _sampler or _Sampler(evaluator, center, req.h, precision)
    n = len(center)
    if req.target.n != n:
        raise ValueError("target and center dimensions differ")
    total = 0j
    for exps, c in wirtinger_to_real(req.target).items():
        total += c * complex(_real_partial(sampler, exps, req.stencil))
    return total


def fd_all(evaluator: Callable, center: Sequence[complex], indices: Sequence[MultiIndex],
           h: float = 1e-3, stencil: int = 4, precision: int = 128) -> list[complex]:
    """:func:`fd_oracle` over many targets, sharing function evaluations."""
    sampler = _Sampler(evaluator, center, h, precision)
    real_cache: dict[tuple[int, ...], complex] = {}
    out = []
    for idx in indices:
        FDRequest(idx, h, stencil)  # validates
        total = 0j
        for exps, c in wirtinger_to_real(idx).items():
            if exps not in real_cache:
                real_cache[exps] = complex(_real_partial(sampler, exps, stencil))
            total += c * real_cache[exps]
        out.append(total)
    return out
