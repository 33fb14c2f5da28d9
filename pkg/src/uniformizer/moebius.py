"""Moebius transformations and the hyperbolic geometry of the unit disc.

Matrices are stored as unit-determinant 2x2 complex representatives. The
density of the disc metric is ``lambda(z) = 1/(1 - |z|^2)``, which has
curvature -4; lengths of closed geodesics are reported in the curvature -1
normalization (see :func:`uniformizer.fuchsian.geodesic_length`).
"""

import cmath
import enum
from dataclasses import dataclass

import numpy as np

from ._common import CLASSIFY_TOL, DET_TOL, POLE_TOL, Estimate, as_sampler
from .errors import (
    BranchUndefinedError,
    ContourEscapeError,
    DerivativeVanishingError,
    DomainError,
    PoleError,
)

__all__ = [
    "INFINITY",
    "ElementType",
    "MoebiusMap",
    "apply",
    "b2_norm_estimate",
    "cayley",
    "classify",
    "compose",
    "derivative",
    "disc_automorphism",
    "hyperbolic_distance",
    "identity",
    "inverse",
    "koebe",
    "koebe_schwarzian",
    "poincare_density",
    "pullback",
    "schwarzian",
    "taylor_coefficients",
]


class _Infinity:
    """The point at infinity of the extended plane (a singleton)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()


class ElementType(str, enum.Enum):
    IDENTITY = "identity"
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    LOXODROMIC = "loxodromic"


@dataclass(frozen=True)
class MoebiusMap:
    """A Moebius map ``z -> (a z + b)/(c z + d)`` with ``ad - bc = 1``.

    Construction divides by the principal square root of the determinant, so
    any invertible matrix is accepted. ``lift_sign`` records which of the two
    SL(2) lifts is meant when that matters (it multiplies under composition).
    """

    a: complex
    b: complex
    c: complex
    d: complex
    lift_sign: int = 1

    def __post_init__(self):
        a, b, c, d = (complex(v) for v in (self.a, self.b, self.c, self.d))
        det = a * d - b * c
        if det == 0 or not cmath.isfinite(det):
            raise DomainError("singular or non-finite matrix")
        if abs(det - 1) > DET_TOL:
            r = cmath.sqrt(det)
            a, b, c, d = a / r, b / r, c / r, d / r
        if self.lift_sign not in (1, -1):
            raise DomainError("lift_sign must be +1 or -1")
        for name, v in zip("abcd", (a, b, c, d)):
            object.__setattr__(self, name, v)

    @classmethod
    def from_matrix(cls, m, lift_sign=1):
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise DomainError("expected a 2x2 matrix")
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1], lift_sign)

    @property
    def matrix(self):
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @property
    def trace(self):
        return self.a + self.d

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other):
        return compose(self, other)

    def __call__(self, z):
        return apply(self, z)

    def inverse(self):
        return inverse(self)

    def __neg__(self):
        return MoebiusMap(-self.a, -self.b, -self.c, -self.d, -self.lift_sign)


def identity():
    return MoebiusMap(1, 0, 0, 1)


def compose(m1, m2):
    """Matrix product ``m1 @ m2``, i.e. the map ``z -> m1(m2(z))``."""
    a = m1.a * m2.a + m1.b * m2.c
    b = m1.a * m2.b + m1.b * m2.d
    c = m1.c * m2.a + m1.d * m2.c
    d = m1.c * m2.b + m1.d * m2.d
    return MoebiusMap(a, b, c, d, m1.lift_sign * m2.lift_sign)


def inverse(m):
    return MoebiusMap(m.d, -m.b, -m.c, m.a, m.lift_sign)


def apply(m, z):
    """Image of ``z`` under ``m``.

    ``z`` may be a complex scalar, :data:`INFINITY`, or an array of finite
    points. Scalars that land on the pole map to :data:`INFINITY`; arrays are
    evaluated directly (a pole gives ``inf``/``nan`` entries).
    """
    if z is INFINITY:
        if m.c == 0:
            return INFINITY
        return m.a / m.c
    if np.ndim(z) > 0:
        z = np.asarray(z, dtype=complex)
        return (m.a * z + m.b) / (m.c * z + m.d)
    z = complex(z)
    den = m.c * z + m.d
    if den == 0:
        return INFINITY
    return (m.a * z + m.b) / den


def classify(m, tol=CLASSIFY_TOL):
    """Conjugacy type from the squared trace (invariant under ``m -> -m``)."""
    t2 = (m.a + m.d) ** 2
    near_pm_identity = abs(m.b) <= tol and abs(m.c) <= tol and abs(m.a - m.d) <= tol
    if near_pm_identity and abs(t2 - 4) <= tol:
        return ElementType.IDENTITY
    if abs(t2 - 4) <= tol:
        return ElementType.PARABOLIC
    if abs(t2.imag) <= tol and 0 <= t2.real < 4:
        return ElementType.ELLIPTIC
    return ElementType.LOXODROMIC


def derivative(m, z):
    """``m'(z) = (c z + d)^-2``."""
    den = m.c * np.asarray(z, dtype=complex) + m.d
    if np.any(np.abs(den) < POLE_TOL):
        raise PoleError("derivative has a pole at z = -d/c")
    out = den ** -2
    return complex(out) if np.ndim(out) == 0 else out


def _check_disc(*zs):
    for z in zs:
        if np.any(np.abs(np.asarray(z)) >= 1):
            raise DomainError("point outside the open unit disc")


def poincare_density(z):
    """``lambda(z) = 1/(1 - |z|^2)`` on the unit disc."""
    _check_disc(z)
    out = 1.0 / (1.0 - np.abs(np.asarray(z)) ** 2)
    return float(out) if np.ndim(out) == 0 else out


def hyperbolic_distance(z, w):
    """Distance for the density ``lambda``: ``arctanh |(z - w)/(1 - conj(z) w)|``."""
    _check_disc(z, w)
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    t = np.abs(z - w) / np.abs(1 - np.conj(z) * w)
    out = np.arctanh(np.minimum(t, 1.0))
    return float(out) if np.ndim(out) == 0 else out


def cayley():
    """Cayley map from the upper half-plane to the disc, ``z -> (z - i)/(z + i)``."""
    return MoebiusMap(1, -1j, 1, 1j)


def disc_automorphism(w, theta=0.0):
    """``z -> e^{i theta} (z - w)/(1 - conj(w) z)``, an element of SU(1,1)."""
    w = complex(w)
    if abs(w) >= 1:
        raise DomainError("centre must lie in the disc")
    e = cmath.exp(0.5j * theta)
    return MoebiusMap(e, -e * w, -w.conjugate() / e, 1 / e)


def taylor_coefficients(f, z0, r, n, nodes):
    """Taylor coefficients ``f^(k)(z0)/k!`` for ``k < n`` from a circular contour.

    Uses the trapezoid rule on ``nodes`` equispaced samples of the circle of
    radius ``r`` about ``z0``, i.e. a scaled FFT.
    """
    f = as_sampler(f)
    theta = 2 * np.pi * np.arange(nodes) / nodes
    try:
        with np.errstate(all="ignore"):
            vals = f(z0 + r * np.exp(1j * theta))
    except (ArithmeticError, ValueError) as exc:
        raise ContourEscapeError(f"sampling failed on the contour: {exc}") from exc
    if not np.all(np.isfinite(vals)):
        raise ContourEscapeError("sampler returned non-finite values on the contour")
    coef = np.fft.fft(vals) / nodes
    return coef[:n] / r ** np.arange(n)


def _schwarzian_from_coefficients(c):
    d1, d2, d3 = c[1], 2 * c[2], 6 * c[3]
    return d3 / d1 - 1.5 * (d2 / d1) ** 2


def schwarzian(f, z, r, nodes=64):
    """Schwarzian derivative ``S_f = (f''/f')' - (f''/f')^2 / 2`` at ``z``.

    Derivatives come from Cauchy integrals on the circle of radius ``r``; the
    value uses ``2 * nodes`` samples and the error is the change from
    ``nodes`` samples.

    Returns
    -------
    Estimate
        ``(value, error)``.
    """
    if nodes < 64:
        raise DomainError("at least 64 contour nodes are required")
    if r <= 0:
        raise DomainError("contour radius must be positive")
    c_lo = taylor_coefficients(f, z, r, 4, nodes)
    c_hi = taylor_coefficients(f, z, r, 4, 2 * nodes)
    scale = max(float(np.max(np.abs(c_hi) * r ** np.arange(4))), 1e-300)
    if abs(c_hi[1]) * r <= 1e-12 * scale:
        raise DerivativeVanishingError("f'(z) vanishes at the evaluation point")
    s_hi = _schwarzian_from_coefficients(c_hi)
    s_lo = _schwarzian_from_coefficients(c_lo)
    return Estimate(complex(s_hi), float(abs(s_hi - s_lo)))


def b2_norm_estimate(f, grid):
    """``max (1 - |z|^2)^2 |f(z)|`` over ``grid`` (a lower bound for the sup)."""
    grid = np.asarray(grid, dtype=complex).ravel()
    _check_disc(grid)
    vals = as_sampler(f)(grid)
    return float(np.max((1 - np.abs(grid) ** 2) ** 2 * np.abs(vals)))


def pullback(f, phi, s, z, branch_log=None):
    """``f(phi(z)) * phi'(z)^s``.

    For integer ``s`` the power is unambiguous. Otherwise ``branch_log`` must
    give the chosen value of ``log((c*0 + d)^2)``; the branch is continued to
    ``z`` through ``log1p(c z/d)``, which stays principal on the disc for
    disc automorphisms.
    """
    z = np.asarray(z, dtype=complex)
    den = phi.c * z + phi.d
    if np.any(np.abs(den) < POLE_TOL):
        raise PoleError("derivative has a pole at z = -d/c")
    fz = as_sampler(f)(apply(phi, z))
    if float(s).is_integer():
        out = fz * den ** (-2 * int(s))
    else:
        if branch_log is None:
            raise BranchUndefinedError("non-integer s needs a stored branch of log(cz+d)^2")
        log_den2 = branch_log + 2 * np.log1p(phi.c * z / phi.d)
        out = fz * np.exp(-s * log_den2)
    return complex(out) if np.ndim(out) == 0 else out


def koebe(z):
    """Koebe function ``z/(1 - z)^2``, extremal among schlicht maps."""
    z = np.asarray(z, dtype=complex)
    return z / (1 - z) ** 2


def koebe_schwarzian(z):
    """Closed form ``S_k(z) = -6/(1 - z^2)^2`` of the Koebe function."""
    z = np.asarray(z, dtype=complex)
    return -6 / (1 - z ** 2) ** 2

