"""
Curvature of the normal bundle
==============================

The Ricci form of the normal bundle restricted to a leaf equals the
squared norm of the twist. For codimension one, S = |L|^2 satisfies
[log S]_{j jbar} = 2 S, the curvature equation of the Poincare metric,
which is why twisted leaves are hyperbolic.
"""

from mafoliation.catalog import catalog_get
from mafoliation.curvature import curvature_gap, fifth_identity, fourth_identity, ricci_matrix, twist_ricci_identity
from mafoliation.foliation import adapt_chart, twist_potential

half = catalog_get("halfplane").spec
x, y = 0.8, -0.5
chart = adapt_chart(half, (0.3 + 1j * x, 0.2 + 1j * y))

rep = ricci_matrix(chart)
print("S via log det H:", rep.S_matrix[0, 0].real)
print("S via third derivatives:", rep.S_closed[0, 0].real)
# the chart uses a unit leaf vector; the closed form 1/(4 Im^2 z1) belongs to
# the frame d1 + (y/x) d2, whose squared length is 1 + (y/x)^2
print("closed form:", 1 / (4 * x**2) / (1 + (y / x) ** 2))

tw = twist_potential(chart)
print("twist-Ricci residual:", twist_ricci_identity(chart, tw, rep).residual)
print("fourth-derivative identity:", fourth_identity(chart).residual)
print("fifth-derivative identity:", fifth_identity(chart).residual)

g = curvature_gap(chart, 0)
print(f"[log S]_11bar = {g.logS_laplacian:.12f}   2 S = {2 * g.S_value:.12f}")

# codimension two only gives an inequality
half3 = catalog_get("halfplane3").spec
g3 = curvature_gap(adapt_chart(half3, (1j, 0, 0)), 0)
print("codim 2 gap (>= 0):", g3.gap)
