"""Norms, pairings, Bergman kernels and Poincare series on the disc.

All weights use the density ``lambda(z) = 1/(1 - |z|^2)``. The weighted
Bergman kernel of weight ``s`` is

    K_s(z, w) = (2s - 1)/pi * (1 - z conj(w))^(-2s),

taken on the principal branch, which is valid because ``Re(1 - z conj(w))``
is positive on the bidisc.

Poincare series are truncated to an enumerated group and summed shell by
shell in word length; the magnitude sum of the last shell used is reported
as the tail estimate.
"""

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from ._common import Estimate, as_sampler, map_chunks, split_points
from ._kernels import monomial_shells
from .errors import (
    DomainError,
    NonIntegerWeightError,
    NotSFactorError,
    PoleError,
    TruncationWarning,
)
from .factors import AutomorphyFactor, canonical_factor

__all__ = [
    "FormSpec",
    "PoincareMass",
    "ThetaResult",
    "alpha_s",
    "automorphy_residual",
    "bergman_kernel",
    "bergman_projection",
    "c_s",
    "cr_residual",
    "disc_moment",
    "disc_seed_norm",
    "embedding_constant",
    "kernel_mass",
    "kernel_mass_reference",
    "l_operator",
    "lp_norm",
    "pairing_disc_route",
    "pairing_domain_route",
    "poincare_mass",
    "theta_series",
    "theta_taylor",
    "theta_values",
    "wp_pairing",
]

# complex entries per chunk of the (elements x points) work arrays
_CHUNK_BUDGET = 2_000_000


def bergman_kernel(z, w, s):
    """``K_s(z, w) = (2s - 1) pi^(s-1) (pi (1 - z conj(w))^2)^(-s)``."""
    if s <= 1:
        raise DomainError("the weighted Bergman kernel needs s > 1")
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    base = 1 - z * np.conj(w)
    out = (2 * s - 1) / math.pi * np.exp(-2 * s * np.log(base))
    return complex(out) if np.ndim(out) == 0 else out


def c_s(s):
    """``c_s = (2s - 1)/(s - 1)``, the norm bound of the Bergman projection."""
    if s == 1:
        raise PoleError("c_s has a pole at s = 1")
    if s < 1:
        raise DomainError("c_s is defined for s > 1")
    return (2 * s - 1) / (s - 1)


def kernel_mass_reference(w, s):
    """Closed form ``c_s lambda(w)^s`` of the kernel mass."""
    return c_s(s) * (1 - abs(w) ** 2) ** (-s)


def kernel_mass(w, s, Q):
    """``integral lambda^(2-s) |K_s(., w)|`` over the disc rule ``Q``."""
    c_s(s)
    w = complex(w)
    if abs(w) >= 1:
        raise DomainError("w must lie in the disc")

    def f(z):
        lam = 1 / (1 - np.abs(z) ** 2)
        return lam ** (2 - s) * np.abs(bergman_kernel(z, w, s))

    v, e = Q.integrate(f)
    return Estimate(v.real, e)


class PoincareMass(NamedTuple):
    value: float
    error: float
    reference: float
    diverges: bool
    refined_value: float


def poincare_mass(s, Q):
    """``integral lambda^(2-s)`` over the disc; analytic value ``pi/(s - 1)``.

    For ``s <= 1`` the integral diverges: the rule is refined once and
    ``diverges`` is set when the value at least doubles.
    """
    def f(z):
        return (1 - np.abs(z) ** 2) ** (s - 2)

    v, e = Q.integrate(f)
    if s > 1:
        return PoincareMass(v.real, e, math.pi / (s - 1), False, float("nan"))
    fine = Q.refined().integrate(f).value.real
    return PoincareMass(v.real, e, float("inf"), bool(fine >= 2 * v.real), fine)


def lp_norm(f, p, s, Q):
    """``L^p_s`` norm: ``(integral lambda^(2 - p s) |f|^p)^(1/p)``, or ``max lambda^-s |f|``.

    For ``p = inf`` the maximum is taken over the nodes and the error is the
    change against the companion rule.
    """
    f = as_sampler(f)
    if p == np.inf or p == "inf":
        def peak(q):
            return float(np.max(q.density ** (-s) * np.abs(f(q.nodes))))

        v = peak(Q)
        e = abs(v - peak(Q.companion)) if Q.companion is not None else 0.0
        return Estimate(v, e)
    if p not in (1, 2):
        raise DomainError("p must be 1, 2 or inf")

    def integrand(z):
        lam = 1 / (1 - np.abs(z) ** 2)
        return lam ** (2 - p * s) * np.abs(f(z)) ** p

    v, e = Q.integrate(integrand)
    v = v.real
    if p == 2:
        root = math.sqrt(max(v, 0.0))
        return Estimate(root, e / (2 * root) if root > 0 else math.sqrt(e))
    return Estimate(v, e)


def wp_pairing(f, g, s, Q):
    """Weil-Petersson pairing ``integral f conj(g) lambda^(2 - 2s)``."""
    f = as_sampler(f)
    g = as_sampler(g)

    def integrand(z):
        lam = 1 / (1 - np.abs(z) ** 2)
        return f(z) * np.conj(g(z)) * lam ** (2 - 2 * s)

    return Q.integrate(integrand)


def bergman_projection(f, s, z, Q):
    """``(beta f)(z) = integral lambda^(2-2s)(w) K_s(z, w) f(w) d^2w``.

    ``z`` may be an array; the result is then elementwise.
    """
    c_s(s)
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1):
        raise DomainError("z must lie in the disc")
    f = as_sampler(f)

    def apply(q):
        w = q.nodes
        weight = q.weights * (1 - np.abs(w) ** 2) ** (2 * s - 2) * f(w)
        k = bergman_kernel(z.reshape(-1, 1), w[None, :], s)
        return (k @ weight).reshape(z.shape)

    v = apply(Q)
    e = np.abs(v - apply(Q.companion)) if Q.companion is not None else np.zeros(z.shape)
    if z.ndim == 0:
        return Estimate(complex(v), float(e))
    return Estimate(v, e)


def l_operator(psi, s, z, Q):
    """``integral lambda^(2-2s)(w) conj(psi(w)) (w - z)^(-2s) d^2w`` for ``|z| > 1``.

    Only integer weights ``s >= 2`` are admitted.
    """
    if not float(s).is_integer() or s < 2:
        raise NonIntegerWeightError("the operator is defined for integer s >= 2")
    s = int(s)
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) <= 1):
        raise DomainError("z must lie outside the closed disc")
    psi = as_sampler(psi)

    def apply(q):
        w = q.nodes
        weight = q.weights * (1 - np.abs(w) ** 2) ** (2 * s - 2) * np.conj(psi(w))
        kern = (w[None, :] - z.reshape(-1, 1)) ** (-2 * s)
        return (kern @ weight).reshape(z.shape)

    v = apply(Q)
    e = np.abs(v - apply(Q.companion)) if Q.companion is not None else np.zeros(z.shape)
    if z.ndim == 0:
        return Estimate(complex(v), float(e))
    return Estimate(v, e)


def cr_residual(f, points, h=1e-4):
    """Max ``|d f / d conj(z)|`` at ``points`` by central differences of step ``h``."""
    f = as_sampler(f)
    z = np.asarray(points, dtype=complex).ravel()
    fx = (f(z + h) - f(z - h)) / (2 * h)
    fy = (f(z + 1j * h) - f(z - 1j * h)) / (2 * h)
    return float(np.max(np.abs(0.5 * (fx + 1j * fy))))


class ThetaResult(NamedTuple):
    """Truncated Poincare series with its tail estimate.

    ``shells[k]`` is the sum over elements of word length ``k`` and
    ``magnitudes[k]`` the matching sum of absolute values.
    """

    value: np.ndarray
    tail: np.ndarray
    shells: np.ndarray
    magnitudes: np.ndarray


def _check_s_factor(factor, s):
    if s < 2:
        raise NotSFactorError("Poincare series are formed for s >= 2")
    if abs(factor.s - s) > 1e-12:
        raise NotSFactorError(f"factor has weight {factor.s}, not {s}")
    parts = factor.parts if factor.form == "product" else (factor,)
    if not any(p.form == "canonical" for p in parts):
        raise NotSFactorError("an s-factor needs a canonical part")
    for p in parts:
        if p.form == "flat" and any(abs(abs(v) - 1) > 1e-12 for v in p.values):
            raise NotSFactorError("flat parts of an s-factor must be unitary")


@dataclass(frozen=True, eq=False)
class FormSpec:
    """Automorphic form ``Theta[h]`` given by a polynomial seed.

    Attributes
    ----------
    seed : tuple of complex
        Coefficients of ``h``, constant term first.
    factor : AutomorphyFactor
        An s-factor of weight ``s``.
    enumeration : EnumeratedGroup
        Truncation of the group used for the series.
    s : float
        Weight, at least 2.
    rel_tol : float
        Stop at the first word length whose shell magnitude falls below
        ``rel_tol`` times the partial sum (0 uses every shell).
    """

    seed: tuple
    factor: AutomorphyFactor
    enumeration: object
    s: float = None
    rel_tol: float = 0.0

    def __post_init__(self):
        seed = tuple(complex(c) for c in np.atleast_1d(self.seed))
        if not seed:
            raise DomainError("empty seed polynomial")
        object.__setattr__(self, "seed", seed)
        s = self.factor.s if self.s is None else float(self.s)
        object.__setattr__(self, "s", s)
        _check_s_factor(self.factor, s)
        if self.enumeration.group is not self.factor.group:
            raise DomainError("enumeration and factor use different groups")

    def evaluate(self, z, warn=True):
        return theta_series(self, z, warn=warn)

    def __call__(self, z):
        return theta_series(self, z, warn=False).value


def _int_power(x, n):
    """``x**n`` for a small nonnegative integer by repeated squaring."""
    out = None
    base = x
    while n:
        if n & 1:
            out = base if out is None else out * base
        n >>= 1
        if n:
            base = base * base
    return np.ones_like(x) if out is None else out


def _inverse_weights(factor, E, z, inv, abs2_inv=None):
    """``rho_g(z)^-1`` and its modulus for the elements of ``E``.

    ``inv = 1/(c z + d)``; ``abs2_inv = |inv|^2`` when already available.
    """
    parts = factor.parts if factor.form == "product" else (factor,)
    out = None
    mod = None
    for p in parts:
        if p.form == "canonical":
            if abs2_inv is None:
                abs2_inv = inv.real ** 2 + inv.imag ** 2
            if p.integer_weight:
                term = _int_power(inv, 2 * int(p.s))
                tmod = _int_power(abs2_inv, int(p.s))
            else:
                ell = E.log_d2[:, None] + 2 * np.log1p(E.c[:, None] * z[None, :] / E.d[:, None])
                term = np.exp(-p.s * ell)
                tmod = abs2_inv ** p.s
        else:
            term = (1 / p._flat_on_enumeration(E))[:, None]
            tmod = np.abs(term)
        out = term if out is None else out * term
        mod = tmod if mod is None else mod * tmod
    return out, mod


def _compiled_weights(factor, E):
    """``(s, flat)`` when the compiled kernel applies, else None.

    The kernel handles integer-weight canonical parts times flat parts;
    ``flat`` is the per-element product of the inverse flat values.
    """
    parts = factor.parts if factor.form == "product" else (factor,)
    s = 0
    flat = np.ones(len(E), complex)
    for p in parts:
        if p.form == "canonical":
            if not p.integer_weight:
                return None
            s += int(p.s)
        else:
            flat = flat / p._flat_on_enumeration(E)
    return s, flat


def theta_values(seeds, factor, E, z, rel_tol=0.0, warn=True):
    """Poincare series ``sum_g h(g z) rho_g(z)^-1`` for several polynomial seeds.

    Parameters
    ----------
    seeds : sequence of sequences
        Polynomial coefficients, constant term first.
    factor : AutomorphyFactor
    E : EnumeratedGroup
    z : array_like
        Points in the disc.
    rel_tol : float
        Per-point early stopping threshold (see :class:`FormSpec`).

    Returns
    -------
    ThetaResult
        Arrays with a leading seed axis; ``shells`` and ``magnitudes`` have
        shape ``(n_seeds, L + 1) + z.shape``.
    """
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    zf = z.ravel()
    if np.any(np.abs(zf) >= 1):
        raise DomainError("points must lie in the disc")
    seeds = [np.atleast_1d(np.asarray(h, dtype=complex)) for h in seeds]
    deg = max(h.size for h in seeds) - 1
    L = E.max_word_length
    bounds = E.shell_bounds[:L + 1]
    sh = (E.a[:, None], E.b[:, None], E.c[:, None], E.d[:, None])

    compiled = _compiled_weights(factor, E)

    def work(zc):
        if compiled is not None:
            return monomial_shells(E, zc, compiled[0], deg, compiled[1])
        a, b, c, d = sh
        den = c * zc[None, :] + d
        abs2_den = den.real ** 2 + den.imag ** 2
        abs2_inv = 1 / abs2_den
        inv = np.conj(den) * abs2_inv
        w, aw = _inverse_weights(factor, E, zc, inv, abs2_inv)
        mono = np.empty((deg + 1, L + 1, zc.size), complex)
        mags = np.empty((deg + 1, L + 1, zc.size))
        t = w
        at = aw
        if deg:
            num = a * zc[None, :] + b
            gz = num * inv
            agz = np.sqrt((num.real ** 2 + num.imag ** 2) * abs2_inv)
        for k in range(deg + 1):
            if k:
                t = t * gz
                at = at * agz
            mono[k] = np.add.reduceat(t, bounds, axis=0)
            mags[k] = np.add.reduceat(at, bounds, axis=0)
        return mono, mags

    chunk = max(1, _CHUNK_BUDGET // max(1, len(E)))
    parts = map_chunks(work, split_points(zf, chunk))
    mono = np.concatenate([p[0] for p in parts], axis=2)
    mags = np.concatenate([p[1] for p in parts], axis=2)

    coef = np.zeros((len(seeds), deg + 1), complex)
    for i, h in enumerate(seeds):
        coef[i, :h.size] = h
    shells = np.einsum("ik,klp->ilp", coef, mono)
    magnitudes = np.einsum("ik,klp->ilp", np.abs(coef), mags)
    partial = np.cumsum(shells, axis=1)
    stop = np.full((len(seeds), zf.size), L)
    if rel_tol > 0 and L >= 2:
        small = magnitudes[:, 2:, :] < rel_tol * np.abs(partial[:, 2:, :])
        hit = np.any(small, axis=1)
        stop = np.where(hit, np.argmax(small, axis=1) + 2, L)
    idx = stop[:, None, :]
    value = np.take_along_axis(partial, idx, axis=1)[:, 0, :]
    tail = np.take_along_axis(magnitudes, idx, axis=1)[:, 0, :]
    if warn and L >= 2 and np.any((stop == L) & (magnitudes[:, L, :] >= magnitudes[:, L - 2, :])
                                  & (magnitudes[:, L, :] > 0)):
        warnings.warn("word-length shells did not decay over the last two lengths",
                      TruncationWarning, stacklevel=2)
    n = len(seeds)
    return ThetaResult(value.reshape((n,) + shape), tail.reshape((n,) + shape),
                       shells.reshape((n, L + 1) + shape),
                       magnitudes.reshape((n, L + 1) + shape))


def theta_series(F, z, warn=True):
    """Truncated ``Theta[h](z) = sum_g h(g z) rho_g(z)^-1`` with tail estimate.

    Returns
    -------
    ThetaResult
        Scalars for scalar ``z``, arrays otherwise (no seed axis).
    """
    res = theta_values([F.seed], F.factor, F.enumeration, z, F.rel_tol, warn)
    value, tail, shells, mags = (r[0] for r in res)
    if np.ndim(z) == 0:
        return ThetaResult(complex(value), float(tail), shells, mags)
    return ThetaResult(value, tail, shells, mags)


def automorphy_residual(F, word, z):
    """``|Theta(g z) - rho_g(z) Theta(z)|`` and the matching tail bound.

    The bound is ``tail(g z) + |rho_g(z)| tail(z)``.
    """
    z = np.asarray(z, dtype=complex)
    g = F.factor.group.element(word)
    gz = g(z)
    at_z = theta_series(F, z, warn=False)
    at_gz = theta_series(F, gz, warn=False)
    rho = F.factor(word, z)
    res = np.abs(at_gz.value - rho * at_z.value)
    bound = np.asarray(at_gz.tail) + np.abs(rho) * np.asarray(at_z.tail)
    return res, bound


def theta_taylor(seeds, factor, E, n, r0=0.5, nodes=128):
    """Taylor coefficients at 0 of truncated Poincare series, with error bounds.

    Coefficients come from a circle of radius ``r0`` (FFT of ``nodes``
    samples). The error of ``a_j`` combines the aliasing change against
    ``nodes/2`` samples and the truncation bound ``r0^-j * max tail`` that
    follows from Cauchy's estimate.

    Returns
    -------
    coef, err : ndarray
        Arrays of shape ``(n_seeds, n)``.
    """
    if nodes < 2 * n:
        raise DomainError("need at least 2n contour nodes")
    theta = 2 * np.pi * np.arange(nodes) / nodes
    ring = r0 * np.exp(1j * theta)
    res = theta_values(seeds, factor, E, ring, warn=False)
    scale = r0 ** -np.arange(n)
    fine = np.fft.fft(res.value, axis=1) / nodes
    coarse = np.fft.fft(res.value[:, ::2], axis=1) / (nodes // 2)
    coef = fine[:, :n] * scale
    alias = np.abs(fine[:, :n] - coarse[:, :n]) * scale
    trunc = np.max(res.tail, axis=1)[:, None] * scale[None, :]
    return coef, alias + trunc


def disc_moment(j, s):
    """``integral_D |z|^(2j) lambda^(2-2s) d^2z = pi j! Gamma(2s-1)/Gamma(j+2s)``."""
    return math.pi * math.exp(gammaln(j + 1) + gammaln(2 * s - 1) - gammaln(j + 2 * s))


def pairing_disc_route(seeds1, seeds2, factor, E, r0=0.5, nodes=128):
    """``<Theta[h1], h2>`` over the whole disc for all seed pairs.

    Orthogonality of monomials reduces the disc integral to
    ``sum_j a_j(Theta[h1]) conj(b_j) * disc_moment(j, s)``, where ``b_j``
    are the coefficients of ``h2``.

    Returns
    -------
    value, err : ndarray
        Matrices indexed ``[i, j]`` for ``seeds1[i]``, ``seeds2[j]``.
    """
    s = factor.s
    b = [np.atleast_1d(np.asarray(h, dtype=complex)) for h in seeds2]
    n = max(h.size for h in b)
    coef, cerr = theta_taylor(seeds1, factor, E, n, r0, nodes)
    mom = np.array([disc_moment(j, s) for j in range(n)])
    B = np.zeros((len(b), n), complex)
    for i, h in enumerate(b):
        B[i, :h.size] = h
    value = (coef * mom) @ np.conj(B).T
    err = (cerr * mom) @ np.abs(B).T
    return value, err


def pairing_domain_route(forms1, forms2, s, Q):
    """``<Theta[h1], Theta[h2]>`` over a fundamental-domain rule, for all pairs.

    ``forms1`` and ``forms2`` are :class:`FormSpec` lists on one group.
    The error combines the companion-rule change, the series truncation
    (tails times values) and the omitted cusp area times the largest
    integrand seen near the cutoff.
    """
    F0 = forms1[0]
    seeds1 = [f.seed for f in forms1]
    seeds2 = [f.seed for f in forms2]

    n1 = len(seeds1)

    def matrices(q):
        # one pass shares the monomial sums between both seed lists
        r = theta_values(seeds1 + seeds2, F0.factor, F0.enumeration, q.nodes, warn=False)
        r1 = ThetaResult(*(x[:n1] for x in r))
        r2 = ThetaResult(*(x[n1:] for x in r))
        wt = q.weights * q.density ** (2 - 2 * s)
        val = (r1.value * wt) @ np.conj(r2.value).T
        trunc = (r1.tail * wt) @ np.abs(r2.value).T + (np.abs(r1.value) * wt) @ r2.tail.T
        lam = q.density
        edge = lam >= 0.5 * lam.max()
        peak = np.max((np.abs(r1.value[:, None, edge]) * np.abs(r2.value[None, :, edge]))
                      * lam[edge] ** (-2 * s), axis=2)
        return val, trunc, peak

    val, trunc, peak = matrices(Q)
    err = trunc.copy()
    if Q.companion is not None:
        cval, _, _ = matrices(Q.companion)
        err += np.abs(val - cval)
    err += peak * Q.tail.get("excluded_lambda2_area", 0.0)
    return val, err


def disc_seed_norm(h, s):
    """``||h||_{L^1_s(D)} = integral_D lambda^(2-s) |h|`` for a polynomial seed.

    Evaluated by Gauss-Legendre in ``r`` and a trapezoid rule in angle,
    which is exact up to rounding for the smooth integrands involved.
    """
    h = np.atleast_1d(np.asarray(h, dtype=complex))
    x, wx = np.polynomial.legendre.leggauss(200)
    r = 0.5 * (x + 1)
    wr = 0.5 * wx
    nt = 4 * h.size + 64
    th = 2 * np.pi * np.arange(nt) / nt
    z = r[:, None] * np.exp(1j * th)[None, :]
    vals = np.abs(np.polynomial.polynomial.polyval(z, h))
    radial = (1 - r ** 2) ** (s - 2) * r
    return float(np.sum(wr[:, None] * radial[:, None] * vals) * 2 * np.pi / nt)


def alpha_s(z, w, E, s, factor=None):
    """``alpha_s(z, w) = Theta[K_s(., w)](z)`` over the enumeration ``E``.

    Returns
    -------
    ThetaResult
        Sum and tail (magnitude of the last shell) for scalar ``z``, ``w``.
    """
    if factor is None:
        factor = canonical_factor(E.group, s)
    z = complex(z)
    w = complex(w)
    if abs(z) >= 1 or abs(w) >= 1:
        raise DomainError("points must lie in the disc")
    zc = np.array([z])
    inv = 1 / (E.c * z + E.d)
    gz = (E.a * z + E.b) * inv
    wts = _inverse_weights(factor, E, zc, inv[:, None])[0][:, 0]
    terms = bergman_kernel(gz, w, s) * wts
    bounds = E.shell_bounds[:E.max_word_length + 1]
    shells = np.add.reduceat(terms, bounds)
    mags = np.add.reduceat(np.abs(terms), bounds)
    return ThetaResult(complex(shells.sum()), float(mags[-1]), shells, mags)


def embedding_constant(E, s, grid):
    """``max over grid of lambda^(-2s)(z) Re alpha_s(z, z)``.

    The error reported is the scaled tail estimate at the maximizer.
    """
    grid = np.asarray(grid, dtype=complex).ravel()
    if np.any(np.abs(grid) >= 1):
        raise DomainError("grid must lie in the disc")
    factor = canonical_factor(E.group, s)
    L = E.max_word_length
    bounds = E.shell_bounds[:L + 1]

    def work(zc):
        inv = 1 / (E.c[:, None] * zc[None, :] + E.d[:, None])
        gz = (E.a[:, None] * zc[None, :] + E.b[:, None]) * inv
        wts, _ = _inverse_weights(factor, E, zc, inv)
        terms = bergman_kernel(gz, zc[None, :], s) * wts
        scale = (1 - np.abs(zc) ** 2) ** (2 * s)
        vals = terms.sum(axis=0).real * scale
        tail = np.add.reduceat(np.abs(terms), bounds, axis=0)[-1] * scale
        return vals, tail

    chunk = max(1, _CHUNK_BUDGET // max(1, len(E)))
    parts = map_chunks(work, split_points(grid, chunk))
    vals = np.concatenate([p[0] for p in parts])
    tails = np.concatenate([p[1] for p in parts])
    i = int(np.argmax(vals))
    return Estimate(float(vals[i]), float(tails[i]))
