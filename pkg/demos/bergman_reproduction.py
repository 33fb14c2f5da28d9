"""
The Bergman kernel on the disc
==============================

For weight s the kernel K_s(z, w) reproduces holomorphic functions against
lambda^(2-2s). We check the kernel mass, reproduce 1 and z, and project a
non-holomorphic function.

"""

import numpy as np

from uniformizer.analysis import (bergman_projection, cr_residual, kernel_mass,
                                  kernel_mass_reference)
from uniformizer.quadrature import disc_quadrature

Q = disc_quadrature(64, 64)

for s in (2, 2.5, 3):
    for w in (0, 0.3, 0.5 + 0.2j):
        m = kernel_mass(w, s, Q)
        print(f"s={s:<4} w={w!s:<10} mass {m.value:.8f}  reference {kernel_mass_reference(w, s):.8f}")

###############################################################################
# Projection fixes holomorphic inputs and maps anything else to a holomorphic
# function, which we test with a finite-difference Cauchy-Riemann residual.

z = -0.3 + 0.2j
print("P[1](z) =", bergman_projection(lambda w: np.ones_like(w), 2, z, Q).value)
print("P[w](z) =", bergman_projection(lambda w: w, 2, z, Q).value, "for z =", z)
res = cr_residual(lambda q: bergman_projection(np.conj, 2, q, Q).value, [0.1, z, 0.45j])
print("CR residual of P[conj]:", res)
