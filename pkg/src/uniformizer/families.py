"""Families of automorphic forms over paths of Fuchsian groups.

A :class:`FamilyPath` assigns a Fuchsian group ``G^u`` to each parameter
``u`` and fixes a list of polynomial seeds. The section ``Psi_i(u, .)`` is the
Poincare series of seed ``i`` for the canonical ``s``-factor of ``G^u``; the
same polynomial is used on every fibre. Gram matrices, Wronskians and rank
scans are computed fibre by fibre.

Gram matrices use the unfolded form of the pairing,
``<Theta[h_i], Theta[h_j]> = integral_D Theta[h_i] conj(h_j) lambda^(2-2s)``,
so no fundamental domain is needed.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._common import Estimate
from .analysis import (
    disc_seed_norm,
    embedding_constant,
    pairing_disc_route,
    theta_values,
)
from .dimensions import SurfaceType, dim_cusp_forms
from .errors import ContourEscapeError, DomainError
from .factors import canonical_factor
from .fuchsian import (
    enumerate_elements,
    fundamental_domain_grid,
    geodesic_length,
    pinch_path,
    trace_squared,
)
from .moebius import MoebiusMap

__all__ = [
    "FamilyPath",
    "GramReport",
    "RankSample",
    "SweepRow",
    "annulus_core_length",
    "asymptotic_sweep",
    "extended_section",
    "gram_matrix",
    "plumbing_length",
    "plumbing_parameter",
    "rank_drop_scan",
    "wronskian",
]

# relative eigenvalue cutoff; the absolute error of the matrix is added on top
RANK_REL_TOL = 1e-8


@dataclass(eq=False)
class FamilyPath:
    """Groups ``u -> G^u`` on ``(u_min, u_max]`` with fixed seeds.

    Parameters
    ----------
    group_map : callable
        Returns a :class:`GroupPresentation` acting on the disc.
    u_min, u_max : float
        Parameter range; ``u_min`` itself is excluded.
    s : float
        Weight, at least 2.
    seeds : sequence of sequences
        Polynomial coefficients, constant term first.
    max_word_length : int
        Enumeration depth on every fibre.
    seed_radius : float
        Radius of the disc on which the seeds must be holomorphic.
        Polynomials qualify for any radius; the value is kept as part of the
        data contract.
    """

    group_map: Callable
    u_min: float
    u_max: float
    s: float
    seeds: tuple
    max_word_length: int = 8
    seed_radius: float = 4.0
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.u_min < self.u_max:
            raise DomainError("need u_min < u_max")
        if self.s < 2:
            raise DomainError("families are formed for s >= 2")
        if self.seed_radius <= 1:
            raise DomainError("seeds must be holomorphic beyond the closed disc")
        seeds = tuple(tuple(complex(c) for c in np.atleast_1d(h)) for h in self.seeds)
        if not seeds or any(not h for h in seeds):
            raise DomainError("need at least one nonempty seed")
        self.seeds = seeds

    @classmethod
    def pinch(cls, s, seeds, u_min=0.0, u_max=1.0, max_word_length=8):
        """Path along :func:`uniformizer.fuchsian.pinch_path`."""
        return cls(pinch_path, u_min, u_max, s, seeds, max_word_length)

    @classmethod
    def constant(cls, G, s, seeds, twist=0.0, u_min=0.0, u_max=1.0, max_word_length=8):
        """The group ``G`` conjugated by the rotation through ``twist * u``.

        With ``twist = 0`` every fibre is ``G`` itself.
        """
        if twist == 0:
            def group_map(u):
                return G
        else:
            def group_map(u):
                e = complex(math.cos(0.5 * twist * u), math.sin(0.5 * twist * u))
                return G.conjugate(MoebiusMap(e, 0, 0, 1 / e))
        return cls(group_map, u_min, u_max, s, seeds, max_word_length)

    def check_parameter(self, u):
        u = float(u)
        if not self.u_min < u <= self.u_max:
            raise DomainError(f"u = {u} is outside ({self.u_min}, {self.u_max}]")
        return u

    def fibre(self, u):
        """``(G^u, E^u, rho^u)`` with the enumeration cached per parameter."""
        u = self.check_parameter(u)
        if u not in self._cache:
            G = self.group_map(u)
            E = enumerate_elements(G, self.max_word_length)
            self._cache[u] = (G, E, canonical_factor(G, self.s))
        return self._cache[u]

    def fibre_dimension(self, u):
        G = self.fibre(u)[0]
        return dim_cusp_forms(SurfaceType(G.genus, G.punctures), self.s)


def extended_section(P, i, u, z):
    """``Psi_i(u, z)``, the Poincare series of seed ``i`` on the fibre at ``u``.

    Returns
    -------
    Estimate
        Value and tail estimate; arrays for array ``z``.
    """
    _, E, rho = P.fibre(u)
    res = theta_values([P.seeds[i]], rho, E, z, warn=False)
    value, tail = res.value[0], res.tail[0]
    if np.ndim(z) == 0:
        return Estimate(complex(value), float(tail))
    return Estimate(value, tail)


@dataclass(frozen=True)
class GramReport:
    """Gram matrix of the sections on one fibre.

    Attributes
    ----------
    u : float
    matrix : ndarray
        Hermitized matrix of pairings ``<Psi_i, Psi_j>``.
    eigenvalues : ndarray
        Real eigenvalues in decreasing order.
    rank : int
        Eigenvalues above ``tolerance``.
    tolerance : float
        ``max(1e-8 * largest eigenvalue, error)``.
    error : float
        Frobenius norm of the entrywise error bound. By Weyl's inequality no
        eigenvalue moves by more than this.
    rank_relative : int
        Eigenvalues above ``1e-8 * largest eigenvalue`` alone.
    """

    u: float
    matrix: np.ndarray
    eigenvalues: np.ndarray
    rank: int
    tolerance: float
    error: float
    rank_relative: int
    entry_errors: np.ndarray = None

    @property
    def positive_semidefinite(self):
        """Smallest eigenvalue is at least ``-error``."""
        return bool(self.eigenvalues[-1] >= -self.error)


def _disc_rule_pairing(seeds, rho, E, s, Q):
    def pair(q):
        res = theta_values(seeds, rho, E, q.nodes, warn=False)
        hv = np.array([np.polynomial.polynomial.polyval(q.nodes, np.asarray(h)) for h in seeds])
        wt = q.weights * q.density ** (2 - 2 * s)
        val = (res.value * wt) @ np.conj(hv).T
        trunc = (res.tail * wt) @ np.abs(hv).T
        return val, trunc

    val, err = pair(Q)
    if Q.companion is not None:
        cval, _ = pair(Q.companion)
        err = err + np.abs(val - cval)
    return val, err


def gram_matrix(P, u, Q=None, r0=0.5, nodes=128):
    """Gram matrix of the sections at ``u``.

    Parameters
    ----------
    P : FamilyPath
    u : float
    Q : QuadratureDomain, optional
        A rule on the whole disc. Without one, the pairing is evaluated
        exactly in ``z`` from the Taylor coefficients of the sections on the
        circle ``|z| = r0`` (``nodes`` samples), using orthogonality of
        monomials.

    Returns
    -------
    GramReport
    """
    u = P.check_parameter(u)
    _, E, rho = P.fibre(u)
    seeds = [list(h) for h in P.seeds]
    if Q is None:
        val, err = pairing_disc_route(seeds, seeds, rho, E, r0, nodes)
    else:
        val, err = _disc_rule_pairing(seeds, rho, E, P.s, Q)
    H = 0.5 * (val + np.conj(val).T)
    E_sym = 0.5 * (err + err.T)
    ev = np.linalg.eigvalsh(H)[::-1]
    eta = float(np.linalg.norm(E_sym))
    rel = RANK_REL_TOL * max(float(ev[0]), 0.0)
    tol = max(rel, eta)
    return GramReport(u, H, ev, int(np.sum(ev > tol)), tol, eta, int(np.sum(ev > rel)), E_sym)


def wronskian(P, u, z0=0.0, N=None, r=0.5, nodes=64):
    """Determinant of ``(d/dz)^k Psi_i(u, z0)`` for ``i, k < N``.

    Derivatives come from the trapezoid rule on the circle of radius ``r``
    about ``z0``.

    Raises
    ------
    ContourEscapeError
        If the circle leaves the disc.
    """
    N = len(P.seeds) if N is None else int(N)
    if not 1 <= N <= len(P.seeds):
        raise DomainError("N must lie between 1 and the seed count")
    if nodes < 2 * N:
        raise DomainError("need at least 2N contour nodes")
    if abs(z0) + r >= 1:
        raise ContourEscapeError("the derivative contour leaves the disc")
    _, E, rho = P.fibre(u)
    ring = z0 + r * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    vals = theta_values([list(h) for h in P.seeds[:N]], rho, E, ring, warn=False).value
    coef = np.fft.fft(vals, axis=1)[:, :N] / nodes
    k = np.arange(N)
    fact = np.array([math.factorial(j) for j in k], dtype=float)
    deriv = coef * fact / r ** k
    return complex(np.linalg.det(deriv))


@dataclass(frozen=True)
class RankSample:
    """Gram rank at one parameter with the expected value ``min(seeds, dim)``."""

    u: float
    rank: int
    expected: int
    surplus: int

    @property
    def drop(self):
        return self.rank < self.expected


def rank_drop_scan(P, samples, tol=RANK_REL_TOL, us=None):
    """Gram rank at ``samples`` parameters spread over the path.

    The parameters are geometric between ``u_max`` and ``u_max / 100``
    clipped to the range (or ``us`` when given). The cutoff is
    ``max(tol * largest eigenvalue, error)``.

    Returns
    -------
    list of RankSample
        ``drop`` marks ranks below ``min(seed count, fibre dimension)``;
        ``surplus`` counts seeds beyond the rank.
    """
    if us is None:
        if samples < 2:
            raise DomainError("need at least two samples")
        lo = max(P.u_max / 100, P.u_min + 1e-3 * (P.u_max - P.u_min))
        us = np.geomspace(P.u_max, lo, samples)
    out = []
    for u in us:
        rep = gram_matrix(P, u)
        cut = max(tol * max(float(rep.eigenvalues[0]), 0.0), rep.error)
        rank = int(np.sum(rep.eigenvalues > cut))
        expected = min(len(P.seeds), P.fibre_dimension(u))
        out.append(RankSample(float(u), rank, expected, len(P.seeds) - rank))
    return out


def plumbing_length(t):
    """Core geodesic length ``2 pi^2 / |log |t||`` of the collar ``z w = t``."""
    m = abs(complex(t))
    if not 0 < m < 1:
        raise DomainError("plumbing parameter needs 0 < |t| < 1")
    return 2 * math.pi ** 2 / abs(math.log(m))


def plumbing_parameter(length):
    """``|t| = exp(-2 pi^2 / length)``, the inverse of :func:`plumbing_length`."""
    if not length > 0:
        raise DomainError("length must be positive")
    return math.exp(-2 * math.pi ** 2 / length)


def annulus_core_length(t):
    """Core length ``pi / modulus`` of the round annulus ``|t| < |z| < 1``.

    The modulus is ``log(1/|t|) / (2 pi)``. This is an independent route to
    :func:`plumbing_length`.
    """
    m = abs(complex(t))
    if not 0 < m < 1:
        raise DomainError("plumbing parameter needs 0 < |t| < 1")
    modulus = math.log(1 / m) / (2 * math.pi)
    return math.pi / modulus


@dataclass(frozen=True)
class SweepRow:
    """One sample of :func:`asymptotic_sweep`.

    ``bound_ok[i, j]`` holds when ``|G_ij| <= M ||h_i|| ||h_j|| + slack``,
    where the slack is the error bound of the Gram entry.
    """

    u: float
    length: float
    trace_squared: float
    plumbing: float
    embedding: float
    embedding_error: float
    gram: np.ndarray
    gram_error: np.ndarray
    seed_norms: np.ndarray
    bound_ok: np.ndarray


def asymptotic_sweep(P, samples, u_min=1e-3, word="a", grid=None, grid_nodes=(16, 32)):
    """Trend table toward the end of the path.

    At ``samples`` parameters geometric from ``u_max`` down to ``u_min`` this
    records the length and ``tr^2`` of ``word``, the plumbing parameter of
    that length, the embedding constant ``M(u)`` over a coarse
    fundamental-domain grid (or ``grid`` when given), the Gram matrix and
    the check ``|G_ij| <= M ||h_i|| ||h_j||`` with ``A^1_s`` seed norms.
    """
    if samples < 2:
        raise DomainError("need at least two samples")
    if not P.u_min < u_min < P.u_max:
        raise DomainError("u_min must lie inside the path range")
    norms = np.array([disc_seed_norm(h, P.s) for h in P.seeds])
    rows = []
    for u in np.geomspace(P.u_max, u_min, samples):
        G, E, _ = P.fibre(u)
        m = G.element(word)
        length = geodesic_length(m)
        tr2 = float(trace_squared(G, word).real)
        pts = grid
        if pts is None:
            pts = fundamental_domain_grid(E, grid_nodes[0], grid_nodes[1], companion=False).nodes
        M = embedding_constant(E, P.s, pts)
        rep = gram_matrix(P, u)
        lim = M.value * np.outer(norms, norms)
        ok = np.abs(rep.matrix) <= lim + rep.entry_errors
        rows.append(SweepRow(float(u), length, tr2, plumbing_parameter(length), M.value,
                             M.error, rep.matrix, rep.entry_errors, norms, ok))
    return rows
