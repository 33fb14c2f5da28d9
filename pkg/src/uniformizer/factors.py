"""Factors of automorphy on a Fuchsian group.

A factor assigns to each group element g a nowhere-vanishing holomorphic
function ``rho_g`` obeying ``rho_{g1 g2}(z) = rho_{g1}(g2 z) rho_{g2}(z)``.
Three forms are supported:

* canonical powers ``rho_g(z) = (c z + d)^{2s}``,
* flat factors (homomorphisms to the nonzero complex numbers),
* pointwise products of the above.

For fractional ``s`` the power is defined through a logarithm of
``(c z + d)^2`` that is fixed on each generator by the principal branch at 0
and continued along words by summation. On a surface group that
continuation may pick up ``2 pi i k`` around the relation; the factor is
only well defined when ``exp(2 pi i s k) = 1``.
"""

import cmath
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (
    BranchConflictError,
    DomainError,
    GroupMismatchError,
    InvalidWordError,
    PeriodDataError,
)
from .fuchsian import LETTERS, GroupPresentation, reduce_word

__all__ = [
    "AutomorphyFactor",
    "FlatSolveResult",
    "PeriodData",
    "canonical_factor",
    "cocycle_residual",
    "factor_product",
    "flat_factor",
    "induced_factor_values",
    "s_factor_check",
    "unitary_flat_solve",
    "word_log_d2",
]

BRANCH_TOL = 1e-6
FLAT_SOLVE_TOL = 1e-10


def _letter_index(G, ch):
    idx = LETTERS.find(ch.lower())
    if idx < 0 or idx >= G.rank:
        raise InvalidWordError(f"letter {ch!r} is not a generator")
    return idx


def word_log_d2(G, word):
    """``log((c_w 0 + d_w)^2)`` continued letter by letter, and the matrix of ``word``.

    The word acts right to left on 0; each letter contributes the principal
    branch ``2 Log d_x + 2 log1p(c_x p / d_x)`` at the current point ``p``.
    """
    m = G.element("")
    ell = 0j
    p = 0j
    for ch in reversed(word):
        x = G.letter_map(ch)
        ell += 2 * cmath.log(x.d) + 2 * cmath.log(1 + x.c * p / x.d)
        p = x(p)
        m = x @ m
    return ell, m


@dataclass(frozen=True, eq=False)
class AutomorphyFactor:
    """Evaluation rule ``(word, z) -> rho_word(z)``.

    Attributes
    ----------
    group : GroupPresentation
    form : {'canonical', 'flat', 'product'}
    s : float
        Weight; 0 for flat factors, the sum of the parts for products.
    values : tuple of complex
        Generator values of a flat factor.
    parts : tuple of AutomorphyFactor
        Factors of a product.
    branch_log : tuple of complex
        ``log((c*0 + d)^2)`` chosen for each generator (principal branch).
    relator_winding : int
        ``k`` with ``log`` of the relator equal to ``2 pi i k`` (0 for free groups).
    """

    group: GroupPresentation
    form: str
    s: float = 0.0
    values: tuple = ()
    parts: tuple = ()
    branch_log: tuple = ()
    relator_winding: int = 0
    _log_values: tuple = field(default=(), repr=False)

    @property
    def integer_weight(self):
        return float(self.s).is_integer()

    def log_value(self, word, z):
        """A logarithm of ``rho_word(z)`` consistent along words."""
        z = np.asarray(z, dtype=complex)
        if self.form == "canonical":
            ell0, m = word_log_d2(self.group, word)
            return self.s * (ell0 + 2 * np.log1p(m.c * z / m.d))
        if self.form == "flat":
            total = 0j
            for ch in word:
                i = _letter_index(self.group, ch)
                total += -self._log_values[i] if ch.isupper() else self._log_values[i]
            return np.full(z.shape, total) if z.ndim else total
        return sum(p.log_value(word, z) for p in self.parts)

    def __call__(self, word, z):
        """``rho_word(z)``; integer canonical powers are evaluated directly."""
        z = np.asarray(z, dtype=complex)
        if self.form == "canonical" and self.integer_weight:
            m = self.group.element(word)
            out = (m.c * z + m.d) ** (2 * int(self.s))
        elif self.form == "flat":
            out = np.full(z.shape, self._flat_word(word)) if z.ndim else self._flat_word(word)
        elif self.form == "product":
            out = np.ones(z.shape, complex) if z.ndim else 1 + 0j
            for p in self.parts:
                out = out * p(word, z)
        else:
            out = np.exp(self.log_value(word, z))
        return complex(out) if np.ndim(out) == 0 else out

    def _flat_word(self, word):
        out = 1 + 0j
        for ch in word:
            v = self.values[_letter_index(self.group, ch)]
            out *= 1 / v if ch.isupper() else v
        return out

    def on_enumeration(self, E, z):
        """``rho_g(z)`` for every element of ``E``; shape ``(len(E),) + z.shape``."""
        if E.group is not self.group:
            raise GroupMismatchError("enumeration belongs to a different group")
        z = np.asarray(z, dtype=complex)
        sh = (-1,) + (1,) * z.ndim
        if self.form == "canonical":
            c, d = E.c.reshape(sh), E.d.reshape(sh)
            if self.integer_weight:
                return (c * z[None] + d) ** (2 * int(self.s))
            ell = E.log_d2.reshape(sh) + 2 * np.log1p(c * z[None] / d)
            return np.exp(self.s * ell)
        if self.form == "flat":
            vals = self._flat_on_enumeration(E)
            return np.broadcast_to(vals.reshape(sh), (len(E),) + z.shape).copy()
        out = np.ones((len(E),) + z.shape, complex)
        for p in self.parts:
            out *= p.on_enumeration(E, z)
        return out

    def _flat_on_enumeration(self, E):
        letter_vals = np.array(list(self.values) + [1 / v for v in self.values], complex)
        out = np.ones(len(E), complex)
        # words are built by prepending, so rho(x w) = rho(x) rho(w)
        for k in range(1, E.max_word_length + 1):
            sl = E.shell(k)
            out[sl] = letter_vals[E.first[sl]] * out[E.parent[sl]]
        return out


def _relator_winding(G):
    if G.kind != "surface":
        return 0
    ell, _ = word_log_d2(G, G.relator)
    return int(round(ell.imag / (2 * np.pi)))


def canonical_factor(G, s):
    """The canonical power ``rho_g(z) = (c z + d)^{2s} = g'(z)^{-s}``.

    Raises
    ------
    BranchConflictError
        If the continued logarithm around the surface relation is
        ``2 pi i k`` with ``|exp(2 pi i s k) - 1| > 1e-6``.
    """
    s = float(s)
    k = _relator_winding(G)
    if abs(cmath.exp(2j * cmath.pi * s * k) - 1) > BRANCH_TOL:
        raise BranchConflictError(
            f"weight {s} is incompatible with the relator winding {k}")
    logs = tuple(2 * cmath.log(g.d) for g in G.generators)
    return AutomorphyFactor(G, "canonical", s, branch_log=logs, relator_winding=k)


def flat_factor(G, values):
    """Flat factor with ``rho_{x} = values[x]`` on generators.

    ``values`` is a sequence in generator order or a mapping from letters.
    """
    if isinstance(values, dict):
        vals = [complex(values[ch]) for ch in G.letters]
    else:
        vals = [complex(v) for v in values]
    if len(vals) != G.rank:
        raise DomainError("one value per generator is required")
    if any(v == 0 for v in vals):
        raise DomainError("flat factor values must be nonzero")
    logs = tuple(cmath.log(v) for v in vals)
    return AutomorphyFactor(G, "flat", 0.0, values=tuple(vals), _log_values=logs)


def factor_product(rho1, rho2):
    """Pointwise product; weights add."""
    if rho1.group is not rho2.group:
        raise GroupMismatchError("factors live on different groups")
    if rho1.form == "flat" and rho2.form == "flat":
        return flat_factor(rho1.group, [u * v for u, v in zip(rho1.values, rho2.values)])
    parts = []
    for r in (rho1, rho2):
        parts.extend(r.parts if r.form == "product" else (r,))
    return AutomorphyFactor(rho1.group, "product", rho1.s + rho2.s, parts=tuple(parts))


def cocycle_residual(rho, g1, g2, z):
    """``|rho_{g1 g2}(z) - rho_{g1}(g2 z) rho_{g2}(z)| / max(1, |rho_{g1 g2}(z)|)``."""
    G = rho.group
    z = complex(z)
    lhs = rho(reduce_word(g1 + g2), z)
    rhs = rho(g1, G.element(g2)(z)) * rho(g2, z)
    return abs(lhs - rhs) / max(1.0, abs(lhs))


def s_factor_check(rho, s, samples):
    """``max | |rho_g(z)| - |g'(z)|^{-s} | / max(1, |g'(z)|^{-s})`` over ``(word, z)`` samples.

    The scaling matches :func:`cocycle_residual`; ``|g'|^{-s}`` grows
    exponentially with word length, so an unscaled difference would only
    measure floating-point magnitude.
    """
    worst = 0.0
    for word, z in samples:
        m = rho.group.element(word)
        target = abs(m.c * z + m.d) ** (2 * s)
        worst = max(worst, abs(abs(rho(word, z)) - target) / max(1.0, target))
    return worst


@dataclass(frozen=True)
class PeriodData:
    """Period matrix ``tau`` and flat-factor exponents.

    ``rho(a_i) = exp(2 pi i sigma_i)`` and ``rho(b_j) = exp(2 pi i sigma'_j)``.
    """

    tau: np.ndarray
    sigma: np.ndarray
    sigma_prime: np.ndarray

    def __post_init__(self):
        tau = np.atleast_2d(np.asarray(self.tau, dtype=complex))
        sigma = np.atleast_1d(np.asarray(self.sigma, dtype=complex))
        sigma_p = np.atleast_1d(np.asarray(self.sigma_prime, dtype=complex))
        g = tau.shape[0]
        if tau.shape != (g, g) or sigma.shape != (g,) or sigma_p.shape != (g,):
            raise PeriodDataError("inconsistent period data shapes")
        if np.max(np.abs(tau - tau.T)) > 1e-10:
            raise PeriodDataError("period matrix is not symmetric")
        try:
            np.linalg.cholesky(tau.imag)
        except np.linalg.LinAlgError as exc:
            raise PeriodDataError("Im(tau) is not positive definite") from exc
        for name, v in (("tau", tau), ("sigma", sigma), ("sigma_prime", sigma_p)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def genus(self):
        return self.tau.shape[0]


class FlatSolveResult(NamedTuple):
    """Solution of the unitary-flat equations.

    ``basis`` names the exponent vector ``mu`` multiplying ``C``: the
    a-exponents ``sigma`` normally, the b-exponents when all ``sigma``
    vanish.
    """

    C: np.ndarray
    residual: float
    flagged: bool
    basis: str


def _flat_system(P, mu):
    g = P.genus
    rows = []
    # Im(sum_i C[k,i] mu_i): coefficients of Re C and Im C
    for k in range(g):
        re = np.zeros((g, g))
        im = np.zeros((g, g))
        re[k, :] = mu.imag
        im[k, :] = mu.real
        rows.append(np.concatenate([re.ravel(), im.ravel()]))
    # Im(sum_{j,i} C[j,i] mu_i tau[j,k])
    for k in range(g):
        prod = mu[None, :] * P.tau[:, k][:, None]
        rows.append(np.concatenate([prod.imag.ravel(), prod.real.ravel()]))
    M = np.array(rows)
    rhs = -np.concatenate([P.sigma.imag, P.sigma_prime.imag])
    return M, rhs


def flat_equation_residual(P, C, basis="sigma"):
    """Max modulus of the imaginary parts in both equation families."""
    mu = P.sigma if basis == "sigma" else P.sigma_prime
    first = C @ mu + P.sigma
    second = (C * mu[None, :]).sum(axis=1) @ P.tau + P.sigma_prime
    return float(max(np.max(np.abs(first.imag)), np.max(np.abs(second.imag))))


def unitary_flat_solve(P, tol=FLAT_SOLVE_TOL):
    """Coefficients ``C`` that make the flat factor of ``P`` equivalent to a unitary one.

    The ``2g`` real conditions are assembled as one real linear system in
    the ``2 g^2`` unknowns ``(Re C, Im C)`` and solved in the least-squares
    sense (minimum norm). ``flagged`` is set when the residual exceeds
    ``tol``; the minimizer is still returned.
    """
    basis = "sigma"
    mu = P.sigma
    if not np.any(mu) and np.any(P.sigma_prime):
        basis = "sigma_prime"
        mu = P.sigma_prime
    g = P.genus
    M, rhs = _flat_system(P, mu)
    x, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    C = x[:g * g].reshape(g, g) + 1j * x[g * g:].reshape(g, g)
    res = flat_equation_residual(P, C, basis)
    return FlatSolveResult(C, res, res > tol, basis)


def induced_factor_values(P, result, w, actions, z):
    """Values of ``h(gamma z) rho_gamma h(z)^-1`` on the generators.

    ``h = exp(2 pi i sum_{j,i} C[j,i] mu_i w_j)`` where ``w(z)`` returns the
    ``g`` abelian integrals at ``z`` and ``actions`` lists the generator
    maps in the order ``a_1..a_g, b_1..b_g``.
    """
    mu = P.sigma if result.basis == "sigma" else P.sigma_prime
    coef = (result.C * mu[None, :]).sum(axis=1)

    def h(p):
        return np.exp(2j * np.pi * np.dot(coef, np.asarray(w(p), dtype=complex)))

    rho = np.exp(2j * np.pi * np.concatenate([P.sigma, P.sigma_prime]))
    return np.array([h(act(z)) * r / h(z) for act, r in zip(actions, rho)])
