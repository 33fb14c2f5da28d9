"""Dimension and area formulas for surfaces of finite type.

A surface type ``(g, n)`` has genus ``g`` and ``n`` punctures and must be
stable, ``2 - 2g - n < 0``. The space of cusp forms of weight ``s`` on such
a surface has dimension

    N_s(g, n) = (2s - 1)(g - 1) + n [s],

where ``[s]`` is the largest integer strictly below ``s``. Pinching a
simple closed curve either lowers the genus and adds two punctures, or
splits the surface into two parts; both moves keep ``2g - 2 + n`` and lower
``N_s`` by one for integer ``s``.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import (
    DomainError,
    InstabilityError,
    InvalidPlanError,
    NonIntegerWeightError,
    OutOfTopologicalRangeError,
)

__all__ = [
    "PinchMove",
    "PinchPlan",
    "SurfaceType",
    "area_conservation_check",
    "boundary_dimension",
    "dim_cusp_forms",
    "floor_strict",
    "hyperbolic_area",
    "plan_parts",
    "random_pinch_plan",
    "riemann_roch_h0",
]


@dataclass(frozen=True)
class SurfaceType:
    """Genus and puncture count of a surface of finite type."""

    g: int
    n: int

    def __post_init__(self):
        for name in ("g", "n"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 0:
                raise DomainError(f"{name} must be a nonnegative integer")
            object.__setattr__(self, name, int(v))

    @property
    def euler_characteristic(self):
        return 2 - 2 * self.g - self.n

    @property
    def stable(self):
        return self.euler_characteristic < 0

    @property
    def max_pinches(self):
        """Number of curves in a pants decomposition, ``3g - 3 + n``."""
        return 3 * self.g - 3 + self.n

    def require_stable(self):
        if not self.stable:
            raise InstabilityError(f"type ({self.g}, {self.n}) has 2 - 2g - n >= 0")
        return self


def _as_type(T):
    return T if isinstance(T, SurfaceType) else SurfaceType(*T)


@dataclass(frozen=True)
class PinchMove:
    """One pinched curve.

    Attributes
    ----------
    separating : bool
        Whether the curve separates its part.
    part : int
        Index of the part that is pinched, in the current part list.
    children : tuple of SurfaceType, optional
        The two resulting types for a separating move.
    """

    separating: bool = False
    part: int = 0
    children: Optional[Tuple[SurfaceType, SurfaceType]] = None

    def __post_init__(self):
        if self.separating:
            if self.children is None or len(self.children) != 2:
                raise InvalidPlanError("a separating move needs two child types")
            object.__setattr__(self, "children", tuple(_as_type(c) for c in self.children))
        elif self.children is not None:
            raise InvalidPlanError("a nonseparating move has no child types")
        if self.part < 0:
            raise InvalidPlanError("part index must be nonnegative")

    @classmethod
    def nonseparating(cls, part=0):
        return cls(False, part)

    @classmethod
    def separating_into(cls, first, second, part=0):
        return cls(True, part, (first, second))


@dataclass(frozen=True)
class PinchPlan:
    """A sequence of pinch moves applied in order."""

    moves: Tuple[PinchMove, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "moves", tuple(self.moves))

    def __len__(self):
        return len(self.moves)


def plan_parts(T, P):
    """Types of the parts left after carrying out ``P`` on ``T``.

    A nonseparating move turns ``(g, n)`` into ``(g - 1, n + 2)`` in place; a
    separating move replaces the part by its first child and appends the
    second.

    Raises
    ------
    InstabilityError
        If ``T`` is unstable.
    InvalidPlanError
        If a move points at a missing part, breaks ``g1 + g2 = g`` and
        ``n1 + n2 = n + 2``, or leaves an unstable part.
    """
    T = _as_type(T).require_stable()
    parts = [T]
    for k, m in enumerate(P.moves):
        if m.part >= len(parts):
            raise InvalidPlanError(f"move {k} refers to part {m.part} of {len(parts)}")
        cur = parts[m.part]
        if m.separating:
            c1, c2 = m.children
            if c1.g + c2.g != cur.g or c1.n + c2.n != cur.n + 2:
                raise InvalidPlanError(f"move {k}: children do not add up to ({cur.g}, {cur.n})")
            new = [c1, c2]
        else:
            if cur.g < 1:
                raise InvalidPlanError(f"move {k}: a genus-0 part has no nonseparating curve")
            new = [SurfaceType(cur.g - 1, cur.n + 2)]
        for c in new:
            if not c.stable:
                raise InvalidPlanError(f"move {k} leaves the unstable part ({c.g}, {c.n})")
        parts[m.part] = new[0]
        parts.extend(new[1:])
    return parts


def floor_strict(s):
    """Largest integer strictly smaller than ``s``; ``[2] = 1``, ``[2.5] = 2``."""
    return math.ceil(s) - 1


def dim_cusp_forms(T, s):
    """``(2s - 1)(g - 1) + n [s]``, the dimension of weight-``s`` cusp forms.

    Raises
    ------
    InstabilityError
        For unstable types.
    DomainError
        If ``s <= 1``, or the formula is negative or not an integer.
    """
    T = _as_type(T).require_stable()
    if s <= 1:
        raise DomainError("weight must exceed 1")
    value = (2 * s - 1) * (T.g - 1) + T.n * floor_strict(s)
    r = round(value)
    if abs(value - r) > 1e-9:
        raise DomainError(f"formula gives the non-integer {value} for s = {s}")
    if r < 0:
        raise DomainError(f"formula gives the negative value {r}")
    return int(r)


def riemann_roch_h0(deg, g, canonical=False):
    """``h0 = deg + 1 - g`` for a line bundle of degree ``deg >= 2g - 1``.

    With ``canonical=True`` and ``deg = 2g - 2`` the canonical bundle is
    meant and ``h0 = g`` is returned.

    Raises
    ------
    OutOfTopologicalRangeError
        Below the topological range, apart from the canonical case.
    """
    deg, g = int(deg), int(g)
    if g < 0:
        raise DomainError("genus must be nonnegative")
    if canonical:
        if deg != 2 * g - 2:
            raise DomainError("the canonical bundle has degree 2g - 2")
        return g
    if deg < 2 * g - 1:
        raise OutOfTopologicalRangeError(f"degree {deg} is below 2g - 1 = {2 * g - 1}")
    return deg + 1 - g


def boundary_dimension(T, s, P):
    """Cusp-form dimension on the pinched surface, ``N_s(T) - len(P)``.

    The value is cross-checked against the sum of ``N_s`` over the parts.

    Raises
    ------
    NonIntegerWeightError
        For non-integer ``s``.
    InstabilityError, InvalidPlanError
        As in :func:`plan_parts`.
    """
    if float(s) != int(s) or s < 2:
        raise NonIntegerWeightError("boundary dimensions are defined for integer s >= 2")
    s = int(s)
    T = _as_type(T)
    parts = plan_parts(T, P)
    top = dim_cusp_forms(T, s) - len(P)
    bottom = sum(dim_cusp_forms(p, s) for p in parts)
    if top != bottom:
        raise InvalidPlanError(f"top-down {top} and bottom-up {bottom} disagree")
    return top


def hyperbolic_area(T):
    """``2 pi (2g - 2 + n)`` in curvature -1."""
    T = _as_type(T).require_stable()
    return 2 * math.pi * (-T.euler_characteristic)


def area_conservation_check(T, P):
    """Whether the parts of the pinched surface have the total area of ``T``.

    The comparison uses the integer ``2g - 2 + n``, so it is exact.
    """
    T = _as_type(T)
    parts = plan_parts(T, P)
    return sum(-p.euler_characteristic for p in parts) == -T.euler_characteristic


def random_pinch_plan(T, rng=None, max_moves=None):
    """A random valid plan on ``T``.

    Each step picks a part with a pinchable curve and then a move on it:
    nonseparating when the genus allows, otherwise (or at random) a
    separating split into two stable children.
    """
    rng = np.random.default_rng(rng)
    T = _as_type(T).require_stable()
    limit = T.max_pinches if max_moves is None else min(max_moves, T.max_pinches)
    k = int(rng.integers(0, limit + 1))
    parts = [T]
    moves = []
    for _ in range(k):
        options = []
        for i, p in enumerate(parts):
            if p.g >= 1 and SurfaceType(p.g - 1, p.n + 2).stable:
                options.append(PinchMove.nonseparating(i))
            for g1 in range(p.g + 1):
                for n1 in range(p.n + 3):
                    c1 = SurfaceType(g1, n1)
                    c2 = SurfaceType(p.g - g1, p.n + 2 - n1)
                    if c1.stable and c2.stable:
                        options.append(PinchMove.separating_into(c1, c2, i))
        if not options:
            break
        m = options[int(rng.integers(len(options)))]
        moves.append(m)
        parts = plan_parts(T, PinchPlan(moves))
    return PinchPlan(moves)
