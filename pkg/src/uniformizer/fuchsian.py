"""Finitely generated Fuchsian groups acting on the unit disc.

Words are strings over ``'a', 'b', ...`` with the upper-case letter denoting
the inverse generator, so ``'aB'`` is ``a @ b^-1``. For a surface group of
genus g the generators are ordered ``a1, b1, a2, b2, ...`` and use the
letters ``a, b, c, d, ...`` in that order.

Enumeration builds all reduced words up to a given length by prepending
letters, shell by shell, and keeps the matrices in flat arrays so the
Poincare-series code can vectorize over group elements.
"""

import math
import string
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    DegenerateParametersError,
    DomainError,
    ElementCapError,
    EmptyDomainError,
    InvalidGroupError,
    InvalidWordError,
    NoRealSolutionError,
    NotHyperbolicError,
    RelationError,
)
from .moebius import (
    ElementType,
    MoebiusMap,
    cayley,
    classify,
    compose,
    identity,
    inverse,
)
from .quadrature import QuadratureDomain

__all__ = [
    "EnumeratedGroup",
    "GroupPresentation",
    "cyclic_group",
    "dirichlet_membership",
    "enumerate_elements",
    "fundamental_domain_grid",
    "geodesic_length",
    "limit_set_sample",
    "orbit",
    "pinch_path",
    "punctured_torus_group",
    "reduce_word",
    "regular_octagon_group",
    "sl2_lift_sign",
    "trace_squared",
    "trivial_group",
]

LETTERS = string.ascii_lowercase
# boundary-circle preservation and relation tolerances
BOUNDARY_TOL = 1e-10
RELATION_TOL = 1e-9
DEFAULT_ELEMENT_CAP = 3_000_000


def reduce_word(word):
    """Freely reduce a word by cancelling adjacent ``xX`` pairs."""
    out = []
    for ch in word:
        if out and out[-1] == ch.swapcase():
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def invert_word(word):
    return word[::-1].swapcase()


@dataclass(frozen=True, eq=False)
class GroupPresentation:
    """Generators of a Fuchsian group in the disc model plus metadata.

    Parameters
    ----------
    generators : tuple of MoebiusMap
        Disc automorphisms, in letter order.
    kind : {'free', 'surface'}
        Free group of rank ``len(generators)`` or closed-surface group with
        the single relation ``prod [a_i, b_i] = +-I``.
    genus, punctures : int
        Signature of the quotient surface.
    basepoint : complex
        Dirichlet centre; no generator may fix it.
    parameters : dict
        Free-form provenance (trace coordinates etc.).
    """

    generators: tuple
    kind: str = "free"
    genus: int = 0
    punctures: int = 0
    basepoint: complex = 0j
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "basepoint", complex(self.basepoint))
        if self.kind not in ("free", "surface"):
            raise InvalidGroupError(f"unknown group kind {self.kind!r}")
        if len(gens) > len(LETTERS):
            raise InvalidGroupError("too many generators")
        if abs(self.basepoint) >= 1:
            raise InvalidGroupError("basepoint must lie in the disc")
        probe = np.exp(2j * np.pi * np.arange(8) / 8)
        for i, g in enumerate(gens):
            if not isinstance(g, MoebiusMap):
                raise InvalidGroupError("generators must be MoebiusMap instances")
            if abs(g(0j)) >= 1:
                raise InvalidGroupError(f"generator {LETTERS[i]} does not preserve the disc")
            edge = np.abs(np.abs(g(probe)) - 1)
            if np.max(edge) > BOUNDARY_TOL * max(1.0, abs(g.a) ** 2):
                raise InvalidGroupError(f"generator {LETTERS[i]} does not preserve the circle")
            if abs(g(self.basepoint) - self.basepoint) <= 1e-12:
                raise InvalidGroupError(f"generator {LETTERS[i]} fixes the basepoint")
        if self.kind == "surface":
            if len(gens) != 2 * self.genus or self.genus < 1:
                raise InvalidGroupError("surface groups need 2g generators")
            _relation_sign(self)

    @property
    def rank(self):
        return len(self.generators)

    @property
    def letters(self):
        return LETTERS[:self.rank]

    @property
    def relator(self):
        """Defining relator word (empty for free groups)."""
        if self.kind != "surface":
            return ""
        out = []
        for i in range(self.genus):
            x, y = LETTERS[2 * i], LETTERS[2 * i + 1]
            out.append(x + y + x.upper() + y.upper())
        return "".join(out)

    def letter_map(self, ch):
        """Matrix of a single letter."""
        idx = LETTERS.find(ch.lower())
        if idx < 0 or idx >= self.rank:
            raise InvalidWordError(f"letter {ch!r} is not a generator")
        g = self.generators[idx]
        return inverse(g) if ch.isupper() else g

    def element(self, word):
        """Matrix of a word (product from left to right)."""
        m = identity()
        for ch in word:
            m = compose(m, self.letter_map(ch))
        return m

    def conjugate(self, h):
        """The group ``h G h^-1`` with the basepoint moved by ``h``."""
        hi = inverse(h)
        gens = tuple(compose(h, compose(g, hi)) for g in self.generators)
        return GroupPresentation(gens, self.kind, self.genus, self.punctures,
                                 complex(h(self.basepoint)), dict(self.parameters))


def _relation_sign(G):
    m = G.element(G.relator)
    mat = m.matrix
    for sign in (1, -1):
        if np.max(np.abs(mat - sign * np.eye(2))) <= RELATION_TOL:
            return sign
    raise RelationError("surface relation is not satisfied up to sign")


def sl2_lift_sign(G):
    """Sign ``e`` with ``prod [a_i, b_i] = e I`` for the stored lifts (+1 for free groups)."""
    if G.kind != "surface":
        return 1
    return _relation_sign(G)


def trivial_group():
    return GroupPresentation((), "free", 0, 0)


def cyclic_group(m):
    """The cyclic group generated by one disc automorphism."""
    return GroupPresentation((m,), "free", 0, 0)


def _to_disc(m_uhp):
    c = cayley()
    return compose(c, compose(m_uhp, inverse(c)))


def punctured_torus_group(x, y):
    """Once-punctured torus group with ``tr A = x``, ``tr B = y``.

    ``z = tr AB`` is the smaller root of ``z^2 - xyz + x^2 + y^2 = 0`` (the
    Markov-type identity for a parabolic commutator). Both generators are
    real hyperbolic matrices whose axes cross at ``i``; the pair is then
    moved to the disc by the Cayley map, so both axes pass through 0.

    Raises
    ------
    DegenerateParametersError
        If ``x <= 2`` or ``y <= 2``.
    NoRealSolutionError
        If ``(xy)^2 < 4 (x^2 + y^2)``.
    """
    x = float(x)
    y = float(y)
    if x <= 2 or y <= 2:
        raise DegenerateParametersError("traces must exceed 2")
    disc = (x * y) ** 2 - 4 * (x * x + y * y)
    if disc < 0:
        raise NoRealSolutionError("trace identity has no real solution")
    z = 0.5 * (x * y - math.sqrt(disc))
    sa = math.sqrt(x * x / 4 - 1)
    sb = math.sqrt(y * y / 4 - 1)
    cos2psi = (z - x * y / 2) / (2 * sa * sb)
    if abs(cos2psi) > 1 + 1e-12:
        raise NoRealSolutionError("trace triple is not realized by crossing axes")
    psi = 0.5 * math.acos(min(1.0, max(-1.0, cos2psi)))
    cp, sp = math.cos(psi), math.sin(psi)
    A = np.array([[x / 2 - sa * cp, sa * sp], [sa * sp, x / 2 + sa * cp]])
    B = np.array([[y / 2 - sb * cp, -sb * sp], [-sb * sp, y / 2 + sb * cp]])
    gens = (_to_disc(MoebiusMap.from_matrix(A)), _to_disc(MoebiusMap.from_matrix(B)))
    return GroupPresentation(gens, "free", 1, 1, parameters={"x": x, "y": y, "z": z})


def pinch_path(u):
    """Group on the path ``x = 2 + u``, ``y = z = x / sqrt(u)``; ``u`` in (0, 1].

    The A-geodesic has length ``2 arccosh(1 + u/2)`` and shrinks to a cusp
    as ``u -> 0``.
    """
    u = float(u)
    if not 0 < u <= 1:
        raise DomainError("pinch parameter must lie in (0, 1]")
    x = 2 + u
    G = punctured_torus_group(x, x / math.sqrt(u))
    G.parameters["u"] = u
    return G


def regular_octagon_group():
    """Genus-2 group of the regular octagon with angles pi/4.

    Sides are labelled ``a1 b1 a1^-1 b1^-1 a2 b2 a2^-1 b2^-1`` going
    counter-clockwise; the pairing of side ``i`` with side ``j`` is
    ``R(theta_j) T R(pi - theta_i)`` with ``T`` the translation through the
    inradius twice.
    """
    # cosh of the inradius (curvature -1) of the regular octagon with angle pi/4
    ch = 1.0 / math.tan(math.pi / 8)
    h = math.acosh(ch)
    T = MoebiusMap(math.cosh(h), math.sinh(h), math.sinh(h), math.cosh(h))

    def rot(t):
        return MoebiusMap(complex(math.cos(t / 2), math.sin(t / 2)), 0, 0,
                          complex(math.cos(t / 2), -math.sin(t / 2)))

    theta = [(2 * k + 1) * math.pi / 8 for k in range(8)]

    def pairing(i, j):
        # maps side i onto side j, reversing orientation along the boundary
        return compose(rot(theta[j]), compose(T, rot(math.pi - theta[i])))

    # within each block of four sides, a maps side 2 onto side 0 and b maps
    # side 1 onto side 3; with these choices prod [a_i, b_i] = +I
    gens = []
    for block in (0, 4):
        gens.append(pairing(block + 2, block))
        gens.append(pairing(block + 1, block + 3))
    return GroupPresentation(tuple(gens), "surface", 2, 0)


@dataclass(eq=False)
class EnumeratedGroup:
    """Finite truncation of a group: all elements of word length <= L.

    Elements are stored in flat arrays ordered by word length. ``log_d2``
    holds ``log((c*0 + d)^2)`` continued along the word from the principal
    branch at each letter; it drives fractional powers of ``cz + d``.
    """

    group: GroupPresentation
    words: tuple
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    lengths: np.ndarray
    parent: np.ndarray
    first: np.ndarray
    log_d2: np.ndarray
    max_word_length: int
    dedup_tol: float
    windings: tuple = ()

    def __post_init__(self):
        for name in ("a", "b", "c", "d", "lengths", "parent", "first", "log_d2"):
            getattr(self, name).setflags(write=False)

    def __len__(self):
        return self.a.size

    @property
    def elements(self):
        """Sequence of ``(word, MoebiusMap)`` pairs (built on demand)."""
        return [(w, self.element(i)) for i, w in enumerate(self.words)]

    def element(self, i):
        return MoebiusMap(self.a[i], self.b[i], self.c[i], self.d[i])

    @cached_property
    def shell_bounds(self):
        """``start[k]:start[k+1]`` indexes the elements of word length k."""
        return np.searchsorted(self.lengths, np.arange(self.max_word_length + 2))

    def shell(self, k):
        lo, hi = self.shell_bounds[k], self.shell_bounds[k + 1]
        return slice(int(lo), int(hi))

    @cached_property
    def index(self):
        return {w: i for i, w in enumerate(self.words)}

    def apply(self, z):
        """Images ``g(z)`` for all elements; shape ``(len(E),) + z.shape``."""
        z = np.asarray(z, dtype=complex)
        zz = z[None, ...]
        sh = (-1,) + (1,) * z.ndim
        return (self.a.reshape(sh) * zz + self.b.reshape(sh)) / (
            self.c.reshape(sh) * zz + self.d.reshape(sh))

    @cached_property
    def orbit_points(self):
        p = self.group.basepoint
        return (self.a * p + self.b) / (self.c * p + self.d)

    @cached_property
    def _orbit_tree(self):
        p = self.group.basepoint
        pts = self.orbit_points
        moved = np.abs(pts - p) > 1e-12
        nontrivial = np.ones(len(self), bool)
        nontrivial[0] = False
        if np.any(nontrivial & ~moved):
            raise DomainError("a nontrivial element fixes the basepoint")
        pts = pts[moved]
        if pts.size == 0:
            return None, pts
        return cKDTree(np.c_[pts.real, pts.imag]), pts

    @cached_property
    def cusp_points(self):
        """Fixed points of short parabolic elements that are ideal vertices of F."""
        limit = min(self.max_word_length, 6)
        idx = np.nonzero(self.lengths <= limit)[0]
        tr2 = (self.a[idx] + self.d[idx]) ** 2
        par = idx[(np.abs(tr2 - 4) <= 1e-8) & (np.abs(self.c[idx]) > 1e-12)]
        found = []
        for i in par:
            p = (self.a[i] - self.d[i]) / (2 * self.c[i])
            p = p / abs(p)
            if any(abs(p - q) < 1e-8 for q in found):
                continue
            if _margin(self, np.array([(1 - 1e-3) * p]))[0] > 0:
                found.append(p)
        return np.array(sorted(found, key=lambda q: np.angle(q) % (2 * np.pi)), dtype=complex)


def _predicted_free_count(rank, L):
    if rank == 0:
        return 1
    total, shell = 1, 2 * rank
    for _ in range(L):
        total += shell
        shell *= 2 * rank - 1
    return total


def enumerate_elements(G, L, dedup_tol=1e-8, max_elements=DEFAULT_ELEMENT_CAP):
    """All reduced words of length <= L with their matrices.

    Free groups need no deduplication. For surface groups an element whose
    matrix equals an earlier one up to sign (max-norm ``dedup_tol``) is
    dropped, and the change of ``log((cz+d)^2)`` at 0 around that relation
    is recorded in ``windings`` as an integer multiple of ``2 pi i``.

    Raises
    ------
    ElementCapError
        If the count would exceed ``max_elements``.
    """
    L = int(L)
    if L < 0:
        raise DomainError("word length must be nonnegative")
    r = G.rank
    if G.kind == "free" and _predicted_free_count(r, L) > max_elements:
        raise ElementCapError(f"{_predicted_free_count(r, L)} elements exceed the cap")
    letters = list(G.letters) + [ch.upper() for ch in G.letters]
    gm = [G.letter_map(ch) for ch in letters]
    ga = np.array([g.a for g in gm]) if gm else np.zeros(0, complex)
    gb = np.array([g.b for g in gm]) if gm else np.zeros(0, complex)
    gc = np.array([g.c for g in gm]) if gm else np.zeros(0, complex)
    gd = np.array([g.d for g in gm]) if gm else np.zeros(0, complex)
    inv_letter = [(j + r) % (2 * r) for j in range(2 * r)]

    A = [np.ones(1, complex)]
    B = [np.zeros(1, complex)]
    C = [np.zeros(1, complex)]
    D = [np.ones(1, complex)]
    LD = [np.zeros(1, complex)]
    lengths = [np.zeros(1, np.int64)]
    parent = [np.full(1, -1, np.int64)]
    first = [np.full(1, -1, np.int64)]
    words = [""]
    windings = []
    count = 1
    front = np.arange(1)
    fa, fb, fc, fd, fl, ff = A[0], B[0], C[0], D[0], LD[0], first[0]
    surface = G.kind == "surface"
    known_vec = _vec(A[0], B[0], C[0], D[0]) if surface else None
    known_ld = LD[0] if surface else None

    for k in range(1, L + 1):
        na, nb, nc, nd, nl, npar, nfirst, nwords = [], [], [], [], [], [], [], []
        p0 = fb / fd
        for j in range(2 * r):
            ok = ff != inv_letter[j] if k > 1 else np.ones(fa.size, bool)
            if not np.any(ok):
                continue
            pa, pb, pc, pd = fa[ok], fb[ok], fc[ok], fd[ok]
            na.append(ga[j] * pa + gb[j] * pc)
            nb.append(ga[j] * pb + gb[j] * pd)
            nc.append(gc[j] * pa + gd[j] * pc)
            nd.append(gc[j] * pb + gd[j] * pd)
            # continuation: log (c_x w0 + d_x)^2 + log d_w^2 with w0 = w(0)
            step = 2 * np.log(gd[j]) + 2 * np.log1p(gc[j] * p0[ok] / gd[j])
            nl.append(step + fl[ok])
            idx = front[ok]
            npar.append(idx)
            nfirst.append(np.full(idx.size, j, np.int64))
            ch = letters[j]
            nwords.extend(ch + words[i] for i in idx)
        if not na:
            break
        na, nb, nc, nd, nl = (np.concatenate(v) for v in (na, nb, nc, nd, nl))
        npar, nfirst = np.concatenate(npar), np.concatenate(nfirst)
        if surface:
            keep, wind = _dedup_shell(known_vec, known_ld, na, nb, nc, nd, nl, dedup_tol)
            windings.extend(wind)
            na, nb, nc, nd, nl = na[keep], nb[keep], nc[keep], nd[keep], nl[keep]
            npar, nfirst = npar[keep], nfirst[keep]
            nwords = [w for w, kp in zip(nwords, keep) if kp]
            known_vec = np.vstack([known_vec, _vec(na, nb, nc, nd)])
            known_ld = np.concatenate([known_ld, nl])
        if count + na.size > max_elements:
            raise ElementCapError(f"more than {max_elements} elements at length {k}")
        A.append(na)
        B.append(nb)
        C.append(nc)
        D.append(nd)
        LD.append(nl)
        lengths.append(np.full(na.size, k, np.int64))
        parent.append(npar)
        first.append(nfirst)
        words.extend(nwords)
        front = np.arange(count, count + na.size)
        count += na.size
        fa, fb, fc, fd, fl, ff = na, nb, nc, nd, nl, nfirst

    return EnumeratedGroup(
        G, tuple(words), np.concatenate(A), np.concatenate(B), np.concatenate(C),
        np.concatenate(D), np.concatenate(lengths), np.concatenate(parent),
        np.concatenate(first), np.concatenate(LD), L, float(dedup_tol), tuple(windings))


def _vec(a, b, c, d):
    return np.stack([a.real, a.imag, b.real, b.imag, c.real, c.imag, d.real, d.imag], axis=-1)


def _dedup_shell(known_vec, known_ld, na, nb, nc, nd, nl, tol):
    """Mark new elements that coincide (up to sign) with known or earlier new ones."""
    vec = _vec(na, nb, nc, nd)
    keep = np.ones(na.size, bool)
    wind = []
    tree = cKDTree(known_vec)
    for sign in (1, -1):
        dist, j = tree.query(sign * vec, p=np.inf, distance_upper_bound=tol)
        hit = np.isfinite(dist) & keep
        for i in np.nonzero(hit)[0]:
            wind.append(_winding(nl[i] - known_ld[j[i]]))
        keep &= ~hit
    both = np.vstack([vec, -vec])
    tree_new = cKDTree(both)
    n = na.size
    for i in np.nonzero(keep)[0]:
        near = tree_new.query_ball_point(vec[i], tol, p=np.inf)
        earlier = [m % n for m in near if m % n < i and keep[m % n]]
        if earlier:
            keep[i] = False
            wind.append(_winding(nl[i] - nl[earlier[0]]))
    return keep, wind


def _winding(delta):
    k = delta.imag / (2 * np.pi)
    return int(round(k))


def orbit(E, z0):
    """Images of ``z0`` under every element of ``E``."""
    z0 = complex(z0)
    if abs(z0) >= 1:
        raise DomainError("orbit seed must lie in the disc")
    return (E.a * z0 + E.b) / (E.c * z0 + E.d)


def limit_set_sample(E):
    """Attracting fixed points of the loxodromic elements of ``E``, pushed to the circle."""
    tr2 = (E.a + E.d) ** 2
    hyper = (np.abs(tr2 - 4) > 1e-9) & ~((np.abs(tr2.imag) <= 1e-9) & (tr2.real < 4))
    hyper &= np.abs(E.c) > 1e-14
    a, b, c, d = E.a[hyper], E.b[hyper], E.c[hyper], E.d[hyper]
    # roots of c p^2 + (d - a) p - b = 0
    disc = np.sqrt((d - a) ** 2 + 4 * b * c)
    cand = np.stack([(a - d + disc) / (2 * c), (a - d - disc) / (2 * c)])
    deriv = np.abs(c[None, :] * cand + d[None, :]) ** -2
    attract = cand[np.argmin(deriv, axis=0), np.arange(cand.shape[1])]
    pts = attract / np.abs(attract)
    if pts.size == 0:
        return pts
    ang = np.round(np.angle(pts), 9)
    _, idx = np.unique(ang, return_index=True)
    return pts[np.sort(idx)]


def geodesic_length(m):
    """Translation length ``2 arccosh(|tr|/2)`` in curvature -1.

    Raises
    ------
    NotHyperbolicError
        Unless the element is loxodromic with real trace.
    """
    t = m.a + m.d
    if classify(m) != ElementType.LOXODROMIC or abs(t.imag) > 1e-9 * max(1.0, abs(t)):
        raise NotHyperbolicError("element is not hyperbolic")
    return 2 * math.acosh(abs(t.real) / 2)


def trace_squared(G, word):
    """``tr^2`` of the word's matrix; equals 4 exactly for parabolic words."""
    for ch in word:
        if LETTERS.find(ch.lower()) < 0 or LETTERS.find(ch.lower()) >= G.rank:
            raise InvalidWordError(f"letter {ch!r} is not a generator")
    return complex(G.element(word).trace ** 2)


def _pseudo_disc(z, p):
    """Euclidean centre and radius of ``{w : d(z, w) < d(z, p)}``."""
    t2 = np.abs(z - p) ** 2 / np.abs(1 - np.conj(p) * z) ** 2
    n2 = np.abs(z) ** 2
    den = 1 - t2 * n2
    centre = z * (1 - t2) / den
    radius = np.sqrt(t2) * (1 - n2) / den
    return centre, radius


def _margin(E, z):
    """Distance from the nearest orbit point to the competing disc, minus its radius.

    Positive inside the Dirichlet domain (for the truncated group).
    """
    tree, _ = E._orbit_tree
    z = np.asarray(z, dtype=complex)
    centre, radius = _pseudo_disc(z, E.group.basepoint)
    if tree is None:
        return np.full(z.shape, np.inf)
    q, _ = tree.query(np.c_[centre.real, centre.imag])
    return q - radius


def dirichlet_membership(E, z):
    """Whether ``z`` lies in the Dirichlet domain of ``E`` centred at the basepoint.

    True iff ``d(z, p) <= d(z, g p) + 1e-12`` for every ``g`` in ``E``. A
    truncated group has fewer competitors than the full group, so the result
    describes a superset of the true domain.
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(np.abs(z) >= 1):
        raise DomainError("points must lie in the disc")
    tree, pts = E._orbit_tree
    out = np.ones(z.shape, bool)
    if tree is not None:
        p = E.group.basepoint
        centre, radius = _pseudo_disc(z, p)
        q, _ = tree.query(np.c_[centre.real, centre.imag])
        for i in np.nonzero(q < radius)[0]:
            near = tree.query_ball_point([centre[i].real, centre[i].imag], radius[i])
            d0 = _dist(z[i], p)
            out[i] = all(d0 <= _dist(z[i], pts[j]) + 1e-12 for j in near)
    return bool(out[0]) if scalar else out


def _dist(z, w):
    t = abs(z - w) / abs(1 - z.conjugate() * w)
    return math.atanh(min(t, 1.0))


def _tri_frac(a, b, c):
    """Fraction of a triangle where the linear interpolant of vertex values is >= 0."""
    lo, mid, hi = np.sort(np.stack([a, b, c]), axis=0)
    out = np.zeros_like(lo)
    out[lo >= 0] = 1.0
    one = (hi > 0) & (mid < 0)
    out[one] = hi[one] ** 2 / ((hi[one] - lo[one]) * (hi[one] - mid[one]))
    two = (mid >= 0) & (lo < 0)
    out[two] = 1 - lo[two] ** 2 / ((hi[two] - lo[two]) * (mid[two] - lo[two]))
    return out


def _ring_cells(E, r0, r1, base, cusp_angles, grade):
    """Cells of the annulus ``r0 < |z| < r1`` with angular refinement at cusps."""
    edges = [base]
    h = base[1] - base[0]
    delta = 1 - r1
    xmin = delta * delta / 8
    if cusp_angles.size and xmin < h:
        n = int(math.ceil(grade * math.log(h / xmin)))
        off = np.geomspace(xmin, h, max(n, 2))
        edges.append((cusp_angles[:, None] + off[None, :]).ravel())
        edges.append((cusp_angles[:, None] - off[None, :]).ravel())
        edges.append(cusp_angles)
    te = np.unique(np.concatenate(edges) % (2 * np.pi))
    te = np.append(te, te[0] + 2 * np.pi)
    k = te.size
    ring = np.exp(1j * te)
    mg = _margin(E, np.concatenate([r0 * ring, r1 * ring]))
    m0, m1 = mg[:k], mg[k:]
    frac = 0.5 * (_tri_frac(m0[:-1], m0[1:], m1[:-1]) + _tri_frac(m1[1:], m0[1:], m1[:-1]))
    area = 0.5 * (r1 * r1 - r0 * r0) * np.diff(te)
    return te, frac, area


def _grid(E, radial_nodes, angular_nodes, rho_lo, rho_hi):
    cusp_angles = np.angle(E.cusp_points) % (2 * np.pi)
    base = np.linspace(0, 2 * np.pi, angular_nodes + 1)[:-1]
    grade = max(angular_nodes // 16, 2)
    rho = np.linspace(rho_lo, rho_hi, radial_nodes + 1)
    rad = np.tanh(rho)
    nodes, weights = [], []
    for i in range(radial_nodes):
        te, frac, area = _ring_cells(E, rad[i], rad[i + 1], base, cusp_angles, grade)
        keep = frac > 0
        rc = math.tanh(0.5 * (rho[i] + rho[i + 1]))
        tc = 0.5 * (te[:-1] + te[1:])
        nodes.append(rc * np.exp(1j * tc[keep]))
        weights.append(area[keep] * frac[keep])
    return np.concatenate(nodes), np.concatenate(weights)


def fundamental_domain_grid(E, radial_nodes=64, angular_nodes=128, cusp_cutoff=1e-3,
                            companion=True):
    """Quadrature rule on the Dirichlet domain of ``E``.

    Rings are uniform in hyperbolic radius out to ``lambda = 1/cusp_cutoff``;
    angular cells are graded geometrically toward detected cusps. Each cell
    is weighted by its Euclidean area times the fraction of the cell inside
    the domain, estimated by linear interpolation of a signed membership
    margin over two triangles. Nodes sit at cell centres, so integrands must
    be invariant under the group for the rule to be meaningful.

    The region beyond the cutoff is left out; ``tail`` records the cusp
    directions and an estimate of the omitted hyperbolic area.

    Raises
    ------
    EmptyDomainError
        If no cell intersects the domain.
    """
    if radial_nodes < 16 or angular_nodes < 16:
        raise DomainError("need at least 16 nodes in each direction")
    if not 0 < cusp_cutoff < 1:
        raise DomainError("cusp cutoff must lie in (0, 1)")
    rho_max = math.acosh(1 / math.sqrt(cusp_cutoff))
    nodes, weights = _grid(E, radial_nodes, angular_nodes, 0.0, rho_max)
    if nodes.size == 0:
        raise EmptyDomainError("no grid cell meets the fundamental domain")
    area = float(np.sum(weights / (1 - np.abs(nodes) ** 2) ** 2))
    comp = None
    err = 0.0
    if companion:
        comp = fundamental_domain_grid(E, max(16, radial_nodes // 2),
                                       max(16, angular_nodes // 2), cusp_cutoff, False)
        err = abs(area - float(np.sum(comp.weights * comp.density ** 2)))
    excluded = 0.0
    if E.cusp_points.size:
        # the omitted horn regions, sampled out to a 1000x smaller cutoff
        rho_ext = math.acosh(1 / math.sqrt(cusp_cutoff * 1e-3))
        xn, xw = _grid(E, max(16, radial_nodes // 4), max(16, angular_nodes // 2),
                       rho_max, rho_ext)
        excluded = float(np.sum(xw / (1 - np.abs(xn) ** 2) ** 2)) if xn.size else 0.0
    tail = {
        "kind": "cusp horoball cutoff",
        "cusp_cutoff": float(cusp_cutoff),
        "rho_max": rho_max,
        "cusp_points": [[float(p.real), float(p.imag)] for p in E.cusp_points],
        "excluded_lambda2_area": excluded,
    }

    def refiner():
        return fundamental_domain_grid(E, 2 * radial_nodes, 2 * angular_nodes, cusp_cutoff,
                                       companion)

    return QuadratureDomain(nodes, weights, tail, err, comp, refiner,
                            f"dirichlet grid {radial_nodes}x{angular_nodes}, "
                            f"cutoff={cusp_cutoff:g}")
