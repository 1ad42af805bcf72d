"""
Potentials as text
==================

Potentials and frames are written in a small expression language with
variables z1..zn, the constant i, + - * / ^ and the functions conj, re,
im, abs2, exp and log.
"""

from mafoliation.dsl import parse_frame, parse_potential, to_text, dump_spec
from mafoliation.errors import ParseError, UnknownVariable

# the half-plane potential: leaves are the lines z2 = s z1 + t with s, t real
spec = parse_potential("im(z2)^2/im(z1)", 2, 1, guards=["im(z1)"])
print(spec.expr)
print("printed back:", to_text(spec.expr))

# parse errors point at the offending character
try:
    parse_potential("abs2(z1 +)", 2, 1)
except ParseError as exc:
    print(exc)

try:
    parse_potential("abs2(z4)", 3, 1)
except UnknownVariable as exc:
    print(exc)

# frames are one row of coefficients per leaf direction
frame = parse_frame(["1, (z2-conj(z2))/(z1-conj(z1))"], 2)
print("frame with r =", frame.r, "and p =", frame.p)

# the same spec as a JSON-ready document
print(dump_spec(spec, "halfplane"))
