"""Compiled inner loops for Poincare series.

The loops run over points, word-length shells and group elements in real
arithmetic and accumulate monomial shell sums with their magnitudes. They
release the GIL, so :func:`uniformizer._common.map_chunks` can run them on
several threads.
"""

import numba
import numpy as np

__all__ = ["monomial_shells"]


@numba.njit(cache=True, fastmath=True, nogil=True)
def _monomial_shells(ar, ai, br, bi, cr, ci, dr, di, fr, fi, fa, zr, zi, bounds, s, deg,
                     out_r, out_i, mag):
    M = zr.size
    L = bounds.size - 1
    for m in range(M):
        x = zr[m]
        y = zi[m]
        for k in range(L):
            for i in range(bounds[k], bounds[k + 1]):
                er = cr[i] * x - ci[i] * y + dr[i]
                ei = cr[i] * y + ci[i] * x + di[i]
                q = 1.0 / (er * er + ei * ei)
                vr = er * q
                vi = -ei * q
                nr = ar[i] * x - ai[i] * y + br[i]
                ni = ar[i] * y + ai[i] * x + bi[i]
                gr = nr * vr - ni * vi
                gi = nr * vi + ni * vr
                sr = vr * vr - vi * vi
                si = 2.0 * vr * vi
                wr = fr[i]
                wi = fi[i]
                aw = fa[i]
                for _ in range(s):
                    t = wr * sr - wi * si
                    wi = wr * si + wi * sr
                    wr = t
                    aw *= q
                ag = np.sqrt(gr * gr + gi * gi)
                for j in range(deg + 1):
                    out_r[j, k, m] += wr
                    out_i[j, k, m] += wi
                    mag[j, k, m] += aw
                    t = wr * gr - wi * gi
                    wi = wr * gi + wi * gr
                    wr = t
                    aw *= ag


def monomial_shells(E, z, s, deg, flat):
    """Shell sums of ``g(z)^j rho_g(z)^-1`` for ``j <= deg``.

    Parameters
    ----------
    E : EnumeratedGroup
    z : ndarray
        Flat complex points.
    s : int
        Integer weight of the canonical part.
    deg : int
        Highest monomial degree.
    flat : ndarray
        Per-element multiplier of the remaining (flat) parts of the factor.

    Returns
    -------
    mono : complex ndarray, shape ``(deg + 1, L + 1, z.size)``
    mags : ndarray, same shape
        Sums of the moduli.
    """
    L = E.max_word_length
    bounds = np.ascontiguousarray(E.shell_bounds[:L + 2], dtype=np.int64)
    shape = (deg + 1, L + 1, z.size)
    out_r = np.zeros(shape)
    out_i = np.zeros(shape)
    mag = np.zeros(shape)
    parts = [np.ascontiguousarray(v) for m in (E.a, E.b, E.c, E.d) for v in (m.real, m.imag)]
    _monomial_shells(*parts, np.ascontiguousarray(flat.real), np.ascontiguousarray(flat.imag),
                     np.ascontiguousarray(np.abs(flat)), np.ascontiguousarray(z.real),
                     np.ascontiguousarray(z.imag), bounds, int(s), int(deg), out_r, out_i, mag)
    return out_r + 1j * out_i, mag
