import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from uniformizer.errors import (
    BranchUndefinedError,
    DerivativeVanishingError,
    DomainError,
    PoleError,
)
from uniformizer.moebius import (
    INFINITY,
    ElementType,
    MoebiusMap,
    apply,
    b2_norm_estimate,
    cayley,
    classify,
    compose,
    derivative,
    disc_automorphism,
    hyperbolic_distance,
    identity,
    inverse,
    koebe,
    koebe_schwarzian,
    poincare_density,
    pullback,
    schwarzian,
    taylor_coefficients,
)

I = identity()
T = MoebiusMap(1, 1, 0, 1)
S = MoebiusMap(0, 1, -1, 0)

finite = st.floats(-3, 3, allow_nan=False)
in_disc = st.builds(lambda r, t: r * cmath.exp(1j * t), st.floats(0, 0.95), st.floats(0, 2 * math.pi))


def _matrix_close(m, ref, tol=1e-12):
    return np.max(np.abs(m.matrix - np.asarray(ref, complex))) <= tol


@st.composite
def sl2(draw):
    a, b, c = draw(finite), draw(finite), draw(finite)
    if abs(a) < 0.1:
        a = 1.0 + a
    d = (1 + b * c) / a
    return MoebiusMap(a + 0.3j * b, b, c, d)


def test_compose_examples():
    m = MoebiusMap(2, 1, 1, 1)
    assert compose(I, m) == m
    assert _matrix_close(compose(m, inverse(m)), np.eye(2))
    assert _matrix_close(compose(T, MoebiusMap(1, 0, 1, 1)), [[2, 1], [1, 1]])


def test_construction_normalizes_determinant():
    m = MoebiusMap(2, 0, 0, 2)
    assert abs(m.det - 1) <= 1e-12
    with pytest.raises(DomainError):
        MoebiusMap(1, 2, 2, 4)


def test_apply_examples():
    assert apply(I, 0.3 + 0.1j) == 0.3 + 0.1j
    assert apply(S, 0) is INFINITY
    assert apply(T, INFINITY) is INFINITY
    assert apply(S, INFINITY) == 0


def test_classify_examples():
    assert classify(T) is ElementType.PARABOLIC
    assert classify(MoebiusMap(2, 0, 0, 0.5)) is ElementType.LOXODROMIC
    t = math.pi / 3
    assert classify(MoebiusMap(math.cos(t), math.sin(t), -math.sin(t), math.cos(t))) is ElementType.ELLIPTIC
    assert classify(I) is ElementType.IDENTITY
    assert classify(-I) is ElementType.IDENTITY


def test_derivative_examples():
    assert derivative(I, 0.4j) == 1
    assert derivative(T, 0.4j) == 1
    assert derivative(MoebiusMap(2, 0, 0, 0.5), 0) == pytest.approx(4)
    with pytest.raises(PoleError):
        derivative(S, 0)


def test_poincare_density_examples():
    assert poincare_density(0) == 1
    assert poincare_density(0.5) == pytest.approx(4 / 3)
    # mpmath: 1/(1 - 0.99^2)
    assert poincare_density(0.99) == pytest.approx(50.2512562814070351758793969849, rel=1e-12)
    with pytest.raises(DomainError):
        poincare_density(1.0)


def test_hyperbolic_distance_examples():
    assert hyperbolic_distance(0.2j, 0.2j) == 0
    assert hyperbolic_distance(0, 0.7) == pytest.approx(math.atanh(0.7))
    # mpmath: arctanh(0.5)
    assert hyperbolic_distance(0, 0.5) == pytest.approx(0.549306144334054845697622618461, rel=1e-14)
    with pytest.raises(DomainError):
        hyperbolic_distance(0, 1.2)


def test_schwarzian_examples():
    mob = MoebiusMap(1 + 1j, 0.3, 0.2, 1.1)
    assert abs(schwarzian(mob, 0.1, 0.3).value) <= 1e-8
    # sympy: S_{z^2} = -3/(2 z^2)
    v = schwarzian(lambda z: z ** 2, 1.0, 0.5)
    assert v.value == pytest.approx(-1.5, abs=1e-10)
    assert v.error <= 1e-8
    # sympy: S_k(0) = -6 for the Koebe function
    assert schwarzian(koebe, 0.0, 0.5).value == pytest.approx(-6, abs=1e-10)


def test_schwarzian_errors():
    with pytest.raises(DerivativeVanishingError):
        schwarzian(lambda z: z ** 2, 0.0, 0.5)
    with pytest.raises(DomainError):
        schwarzian(koebe, 0.0, 0.5, nodes=32)


def test_taylor_coefficients_of_exp():
    c = taylor_coefficients(np.exp, 0, 1.0, 6, 64)
    ref = [1 / math.factorial(k) for k in range(6)]
    assert np.allclose(c, ref, atol=1e-14)


def test_b2_norm_examples():
    grid = np.linspace(-0.999, 0.999, 401)
    assert b2_norm_estimate(lambda z: 0 * z, grid) == 0
    assert b2_norm_estimate(lambda z: np.ones_like(z), grid) == pytest.approx(1)
    assert b2_norm_estimate(koebe_schwarzian, -np.linspace(0, 0.999, 400)) == pytest.approx(6, abs=1e-3)


def test_pullback_examples():
    f = lambda z: z ** 2 + 1  # noqa: E731
    z = np.array([0.1, 0.2j])
    assert np.allclose(pullback(f, I, 2.5, z, branch_log=0.0), f(z))
    phi = MoebiusMap(1, 0.2, 0.1, 1.02)
    assert np.allclose(pullback(f, phi, 0, z), f(phi(z)))
    assert np.allclose(pullback(lambda w: np.ones_like(w), T, 1.7, z, branch_log=0.0), 1)
    with pytest.raises(BranchUndefinedError):
        pullback(f, phi, 0.5, z)


def test_cayley_maps_upper_half_plane_to_disc():
    assert abs(cayley()(1j)) < 1e-15
    assert abs(abs(cayley()(3.0)) - 1) < 1e-15


@settings(max_examples=200, deadline=None)
@given(sl2(), sl2())
def test_compose_keeps_unit_determinant(m1, m2):
    assert abs(compose(m1, m2).det - 1) <= 1e-12


def test_compose_determinant_many_pairs(rng):
    a, b, c = rng.uniform(-2, 2, (3, 10_000))
    a = np.where(np.abs(a) < 0.1, 1.0, a)
    d = (1 + b * c) / a
    for i in range(0, 10_000, 2):
        m = compose(MoebiusMap(a[i], b[i], c[i], d[i]), MoebiusMap(a[i + 1], b[i + 1], c[i + 1], d[i + 1]))
        assert abs(m.det - 1) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(sl2(), sl2())
def test_classify_conjugation_invariant(m, h):
    conj = compose(h, compose(m, inverse(h)))
    tr2 = (m.a + m.d) ** 2
    # skip near-boundary cases where rounding can move tr^2 across a class
    if abs(tr2 - 4) < 1e-6 or (abs(tr2.imag) < 1e-6 and abs(tr2.real) < 1e-6):
        return
    assert classify(conj) == classify(m)
    assert classify(-m) == classify(m)


@settings(max_examples=100, deadline=None)
@given(in_disc, st.floats(0, 2 * math.pi), in_disc)
def test_schwarzian_chain_rule(w, theta, z):
    g = disc_automorphism(complex(w) * 0.5, theta)
    z = complex(z) * 0.5
    gz = g(z)
    # f o g must stay locally injective on the contour
    assume(abs(z - inverse(g)(0j)) > 0.2)
    lhs = schwarzian(lambda p: g(p) ** 2, z, 0.05).value
    # S_g = 0 for Moebius g
    rhs = (-1.5 / gz ** 2) * derivative(g, z) ** 2
    assert abs(lhs - rhs) <= 1e-6 * max(1, abs(rhs))


@settings(max_examples=200, deadline=None)
@given(in_disc, in_disc, in_disc, st.floats(0, 2 * math.pi))
def test_distance_invariance(z, w, c, theta):
    phi = disc_automorphism(complex(c), theta)
    d0 = hyperbolic_distance(z, w)
    d1 = hyperbolic_distance(phi(complex(z)), phi(complex(w)))
    assert abs(d0 - d1) <= 1e-10 * max(1, d0)
