"""
Wirtinger jets and the finite-difference oracle
===============================================

A jet stores raw partial derivatives in z and zbar up to a fixed order.
Here we build one for a curved potential and check a few entries
against high-precision finite differences.
"""

import numpy as np

from mafoliation.dsl import eval_jet, hp_evaluator, parse_expr
from mafoliation.fdoracle import FDRequest, fd_oracle
from mafoliation.jets import MultiIndex

# the potential |z2 - z1^2|^2, whose Levi form has rank one everywhere
u = parse_expr("abs2(z2 - z1^2)", 2)
jet = eval_jet(u, (1, 1), 4)

# u_{1 1bar} = |d w / d z1|^2 = |-2 z1|^2 = 4 at z1 = 1
print("u_{1 1bar}(1, 1) =", jet[MultiIndex.of(2, holo=[0], anti=[0])])

# the Levi matrix, read straight off the jet
H = np.array([[jet[MultiIndex.of(2, holo=[j], anti=[k])] for k in range(2)] for j in range(2)])
print("Levi matrix:\n", H.real)

# a fourth derivative, once by jet arithmetic and once by a 4-point stencil
# in 128-bit arithmetic (h^4 = 1e-12 would eat double precision alive)
idx = MultiIndex.of(2, holo=[0, 0], anti=[0, 0])
fd = fd_oracle(hp_evaluator(u), (1, 1), FDRequest(idx, h=1e-3))
print("u_{1 1 1bar 1bar}: jet", jet[idx].real, " finite differences", fd.real)
