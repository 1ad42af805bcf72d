"""
Foliations given by frames
==========================

A foliation can also be given directly by vector fields. Integrability
is checked by brackets, and the twist is the normal part of [Z, conj W].
"""

from mafoliation.catalog import catalog_get, twist_agreement
from mafoliation.foliation import frobenius_residual, twist_frame

slope = catalog_get("slope-frame").spec
print("slope frame Frobenius residual:", frobenius_residual(slope, (1j, 0)))
print("slope frame twist at (i, 0):", twist_frame(slope, (1j, 0)).C[0, 0, 0])

# the same foliation as the half-plane potential, computed independently
print("agreement with the potential:", twist_agreement((0.4 + 1.3j, -0.2 + 0.6j)))

bent = catalog_get("noninvolutive-frame").spec
print("d1 + conj(z1) d2 residual:", frobenius_residual(bent, (0, 0)))
