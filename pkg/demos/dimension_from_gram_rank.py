"""
Counting cusp forms with a Gram matrix
======================================

The once-punctured torus with trace coordinates (3, 3) carries a line of
weight-2 cusp forms and a plane of weight-3 ones. We average the monomials
1, z, ..., z^5 over the group and look at how many independent forms come
out.

"""

import numpy as np

from uniformizer.dimensions import dim_cusp_forms
from uniformizer.families import FamilyPath, gram_matrix
from uniformizer.fuchsian import punctured_torus_group

G = punctured_torus_group(3, 3)
seeds = [[0] * k + [1] for k in range(6)]

###############################################################################
# The Gram matrix is computed from Taylor coefficients of the Poincare series,
# so the pairing is exact in z and only the truncation of the group sum
# contributes error. Eigenvalues below that error are not counted.

for s in (2, 3):
    rep = gram_matrix(FamilyPath.constant(G, s, seeds, max_word_length=10), 1.0)
    np.set_printoptions(precision=3)
    print(f"s = {s}: eigenvalues {rep.eigenvalues}")
    print(f"  error bound {rep.error:.2e}, rank {rep.rank}, "
          f"expected {dim_cusp_forms((1, 1), s)}")

###############################################################################
# A cutoff relative to the top eigenvalue alone overcounts: the truncated
# series still carry noise well above 1e-8 of the largest eigenvalue.

print("rank with a purely relative cutoff:", rep.rank_relative)
