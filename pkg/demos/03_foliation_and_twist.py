"""
Leaves, frames and the twist
============================

For a potential whose Levi form has constant rank p, the kernel of the
Levi form is tangent to a foliation by complex submanifolds. We adapt a
chart to the leaf through a point, build the annihilating frame and
measure how far the leaves are from varying holomorphically.
"""

import numpy as np

from mafoliation.catalog import catalog_get
from mafoliation.foliation import adapt_chart, build_frame, twist_potential

# a holomorphic foliation: the leaves z2 = z1^2 + c
graph = catalog_get("graph").spec
chart = adapt_chart(graph, (1, 1))
print("kernel direction:", np.round(chart.U[:, 0], 6), " expected (1, 2)/sqrt(5)")
print("leaf straightening residual:", chart.straighten_residual)
print("twist:", twist_potential(chart).max_abs)

# the half-plane foliation has a twist of size 1/(2 Im z1)
half = catalog_get("halfplane").spec
for x in (0.5, 1.0, 2.0):
    chart = adapt_chart(half, (1j * x, 0))
    t = twist_potential(chart)
    print(f"Im z1 = {x}:  C = {t.C[0, 0, 0]:.6f}   |L|^2 = {t.norms[0]:.6f}")

# the frame Z = d1 + B d2 annihilates the Levi form at the center
f = build_frame(chart)
print("B =", f.B, " annihilation residual", f.annihilation)
