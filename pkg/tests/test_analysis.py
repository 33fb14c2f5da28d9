import math
import warnings

import numpy as np
import pytest

import uniformizer.analysis as an
from conftest import random_disc_points
from uniformizer.analysis import (
    FormSpec,
    alpha_s,
    bergman_kernel,
    bergman_projection,
    c_s,
    cr_residual,
    disc_moment,
    disc_seed_norm,
    embedding_constant,
    kernel_mass,
    l_operator,
    lp_norm,
    pairing_disc_route,
    poincare_mass,
    theta_series,
    theta_taylor,
    theta_values,
    wp_pairing,
)
from uniformizer.errors import (
    DomainError,
    NonIntegerWeightError,
    NotSFactorError,
    PoleError,
    TruncationWarning,
)
from uniformizer.factors import canonical_factor, factor_product, flat_factor
from uniformizer.fuchsian import enumerate_elements, fundamental_domain_grid, trivial_group
from uniformizer.quadrature import disc_quadrature


@pytest.fixture(scope="module")
def disc():
    return disc_quadrature(64, 64)


@pytest.fixture(scope="module")
def trivial_e():
    return enumerate_elements(trivial_group(), 0)


def test_bergman_kernel_examples(rng):
    assert bergman_kernel(0, 0, 2) == pytest.approx(3 / math.pi)
    assert bergman_kernel(0.5, 0, 2) == pytest.approx(3 / math.pi)
    z, w = random_disc_points(rng, 2)
    for s in (2, 2.5, 3):
        assert bergman_kernel(z, w, s) == pytest.approx(np.conj(bergman_kernel(w, z, s)))


def test_c_s_examples():
    assert c_s(2) == 3
    assert c_s(3) == 2.5
    vals = [c_s(s) for s in (2, 5, 50, 5000)]
    assert np.all(np.diff(vals) < 0) and vals[-1] == pytest.approx(2, abs=1e-3)
    with pytest.raises(PoleError):
        c_s(1)


def test_kernel_mass_examples(disc):
    assert kernel_mass(0, 2, disc).value == pytest.approx(3, rel=1e-2)
    assert kernel_mass(0.5, 2, disc).value == pytest.approx(16 / 3, rel=1e-2)
    assert kernel_mass(0, 3, disc).value == pytest.approx(2.5, rel=1e-2)


def test_poincare_mass_examples(disc):
    assert poincare_mass(2, disc).value == pytest.approx(math.pi, rel=1e-2)
    assert poincare_mass(3, disc).value == pytest.approx(math.pi / 2, rel=1e-2)
    div = poincare_mass(1, disc)
    assert div.diverges and div.refined_value >= 2 * div.value


def test_lp_norm_examples(disc):
    zero = lambda z: 0 * z  # noqa: E731
    assert lp_norm(zero, 1, 2, disc).value == 0
    assert lp_norm(lambda z: np.ones_like(z), 1, 2, disc).value == pytest.approx(math.pi, rel=1e-2)
    with pytest.raises(DomainError):
        lp_norm(zero, 3, 2, disc)


def test_lp_norm_ordering_on_fixture(torus_e8):
    """||f||_1 <= sqrt(A) ||f||_2 <= A ||f||_inf with A the lambda^2-area of F."""
    Q = fundamental_domain_grid(torus_e8, 32, 64)
    F = FormSpec([1], canonical_factor(torus_e8.group, 2), torus_e8)
    area = float(np.sum(Q.weights * Q.density ** 2))
    n1 = lp_norm(F, 1, 2, Q).value
    n2 = lp_norm(F, 2, 2, Q).value
    ninf = lp_norm(F, np.inf, 2, Q).value
    assert n1 <= math.sqrt(area) * n2 * (1 + 1e-9)
    assert n2 <= math.sqrt(area) * ninf * (1 + 1e-9)


def test_wp_pairing_examples(disc):
    f = lambda z: 1 + z ** 2  # noqa: E731
    g = lambda z: 2j * z ** 2 - z  # noqa: E731
    ff = wp_pairing(f, f, 2, disc).value
    assert ff.real > 0 and abs(ff.imag) <= 1e-12
    assert wp_pairing(f, g, 2, disc).value == pytest.approx(np.conj(wp_pairing(g, f, 2, disc).value),
                                                            abs=1e-10)
    # monomials are orthogonal with norms given by the disc moments
    assert ff.real == pytest.approx(disc_moment(0, 2) + disc_moment(2, 2), rel=1e-6)


def test_disc_moment_oracle():
    # mpmath quadrature of 2 pi r^5 (1 - r^2)^2 on [0, 1]
    assert disc_moment(2, 2) == pytest.approx(0.104719755119659774615421446109, rel=1e-14)
    assert disc_moment(0, 2) == pytest.approx(math.pi / 3)


def test_disc_seed_norm():
    assert disc_seed_norm([1], 2) == pytest.approx(math.pi, rel=1e-12)
    assert disc_seed_norm([0, 1], 2) == pytest.approx(2 * math.pi / 3, rel=1e-12)
    assert disc_seed_norm([1], 3) == pytest.approx(math.pi / 2, rel=1e-12)


def test_bergman_projection_examples(disc):
    assert bergman_projection(lambda w: np.ones_like(w), 2, 0, disc).value == pytest.approx(1, rel=1e-2)
    assert bergman_projection(lambda w: w, 2, 0.3, disc).value == pytest.approx(0.3, rel=1e-2)
    out = lambda z: bergman_projection(np.conj, 2, z, disc).value  # noqa: E731
    assert cr_residual(out, [0.1, 0.2j, -0.3 + 0.1j]) <= 1e-3


def test_l_operator_examples(disc):
    z = np.array([1.5, -2j, 1.2 + 1.2j])
    assert np.allclose(l_operator(lambda w: 0 * w, 2, z, disc).value, 0)
    psi = lambda w: 1 + w + 0.5 * w ** 3  # noqa: E731
    a = l_operator(psi, 2, z, disc).value
    b = l_operator(lambda w: 1j * psi(w), 2, z, disc).value
    assert np.max(np.abs(b + 1j * a)) <= 1e-10
    ring = 1.5 * np.exp(2j * np.pi * np.arange(8) / 8)
    assert cr_residual(lambda q: l_operator(psi, 2, q, disc).value, ring) <= 1e-3
    with pytest.raises(NonIntegerWeightError):
        l_operator(psi, 2.5, z, disc)
    with pytest.raises(DomainError):
        l_operator(psi, 2, 0.5, disc)


def test_duality_sandwich(disc):
    """c_s^-1 ||psi|| <= sup |l_psi(f)| / ||f||_1 <= ||psi|| for psi = K(., 0)."""
    s = 2
    psi = lambda z: bergman_kernel(z, 0, s)  # noqa: E731
    norm_psi = lp_norm(psi, np.inf, s, disc).value
    best = 0.0
    # w = 0 attains the lower bound, since kernel_mass(0, s) = c_s
    ws = np.concatenate([[0], random_disc_points(np.random.default_rng(5), 30, 0.8)])
    for w in ws:
        f = lambda z, w=w: bergman_kernel(z, w, s)  # noqa: E731
        ratio = abs(wp_pairing(f, psi, s, disc).value) / lp_norm(f, 1, s, disc).value
        best = max(best, ratio)
    assert norm_psi / c_s(s) * (1 - 1e-2) <= best <= norm_psi * (1 + 1e-2)


def test_theta_trivial_group(trivial_e):
    rho = canonical_factor(trivial_e.group, 2)
    z = np.array([0.1, 0.5j])
    F = FormSpec([1, 2, 3j], rho, trivial_e)
    assert np.allclose(F(z), 1 + 2 * z + 3j * z ** 2)


def test_theta_shell_decay(torus_e10):
    rho = canonical_factor(torus_e10.group, 2)
    r = theta_series(FormSpec([1], rho, torus_e10), 0.0)
    assert np.all(np.diff(r.magnitudes[4:]) < 0)
    assert r.tail == r.magnitudes[-1]


def test_theta_truncation_warning(torus):
    E = enumerate_elements(torus, 3)
    F = FormSpec([1], canonical_factor(torus, 2), E)
    with pytest.warns(TruncationWarning):
        F.evaluate(0.95)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        F.evaluate(0.0)


def test_theta_rel_tol_stops_early(torus_e8):
    rho = canonical_factor(torus_e8.group, 2)
    full = FormSpec([1], rho, torus_e8).evaluate(0.2)
    early = FormSpec([1], rho, torus_e8, rel_tol=1e-2).evaluate(0.2)
    assert early.value != full.value
    assert abs(early.value - full.value) <= 10 * early.tail


def test_compiled_kernel_matches_numpy(torus_e8, rng, monkeypatch):
    G = torus_e8.group
    z = random_disc_points(rng, 25, 0.8)
    seeds = [[1], [0, 1], [1, 2, 3j]]
    factors = [canonical_factor(G, 2), canonical_factor(G, 3),
               factor_product(canonical_factor(G, 2), flat_factor(G, [np.exp(0.3j), np.exp(-1j)]))]
    for rho in factors:
        fast = theta_values(seeds, rho, torus_e8, z, warn=False)
        monkeypatch.setattr(an, "_compiled_weights", lambda f, E: None)
        slow = theta_values(seeds, rho, torus_e8, z, warn=False)
        monkeypatch.undo()
        assert np.allclose(fast.value, slow.value, rtol=1e-9, atol=1e-12)
        assert np.allclose(fast.magnitudes, slow.magnitudes, rtol=1e-10)


def test_fractional_weight_theta(torus_e8, rng):
    from uniformizer.analysis import automorphy_residual

    F = FormSpec([1], canonical_factor(torus_e8.group, 2.5), torus_e8)
    z = random_disc_points(rng, 10, 0.7)
    for w in "ab":
        res, bound = automorphy_residual(F, w, z)
        assert np.all(res <= 10 * bound)


def test_formspec_validation(torus_e8, trivial_e):
    G = torus_e8.group
    with pytest.raises(NotSFactorError):
        FormSpec([1], canonical_factor(G, 1.5), torus_e8)
    with pytest.raises(NotSFactorError):
        FormSpec([1], flat_factor(G, [1, 1]), torus_e8)
    bad = factor_product(canonical_factor(G, 2), flat_factor(G, [2, 1]))
    with pytest.raises(NotSFactorError):
        FormSpec([1], bad, torus_e8)
    with pytest.raises(DomainError):
        FormSpec([1], canonical_factor(G, 2), trivial_e)
    with pytest.raises(DomainError):
        FormSpec([], canonical_factor(G, 2), torus_e8)


def test_theta_taylor_trivial(trivial_e):
    rho = canonical_factor(trivial_e.group, 2)
    coef, err = theta_taylor([[1, 2, 3]], rho, trivial_e, 4)
    assert np.allclose(coef[0], [1, 2, 3, 0], atol=1e-12)
    # one shell only, so the truncation bound is the whole sum
    assert np.all(np.isfinite(err)) and np.all(err >= np.abs(coef[0]) - 1e-12)


def test_pairing_disc_route_trivial(trivial_e):
    rho = canonical_factor(trivial_e.group, 2)
    v, e = pairing_disc_route([[1], [0, 1]], [[1], [0, 1]], rho, trivial_e)
    assert np.allclose(v, np.diag([disc_moment(0, 2), disc_moment(1, 2)]), atol=1e-12)


def test_alpha_examples(trivial_e, torus_e10, rng):
    z, w = random_disc_points(rng, 2, 0.6)
    assert alpha_s(z, w, trivial_e, 2).value == pytest.approx(bergman_kernel(z, w, 2))
    assert alpha_s(z, w, torus_e10, 2).value == pytest.approx(np.conj(alpha_s(w, z, torus_e10, 2).value))


def test_alpha_rank_one_on_torus(torus_e10, rng):
    # weight-2 cusp forms on the torus form a line, so alpha factorises and
    # Cauchy-Schwarz is an equality; points stay near 0 where L = 10 converges
    for z, w in random_disc_points(rng, 10, 0.35).reshape(5, 2):
        azz = alpha_s(z, z, torus_e10, 2).value
        aww = alpha_s(w, w, torus_e10, 2).value
        azw = alpha_s(z, w, torus_e10, 2).value
        assert azz.real > 0 and abs(azz.imag) <= 1e-10 * azz.real
        assert abs(azw) ** 2 == pytest.approx(azz.real * aww.real, rel=0.02)


def test_embedding_constant_examples(trivial_e, torus, torus_e8, torus_e10):
    grid = np.array([0, 0.3, 0.5j, -0.4 + 0.2j, 0.6, -0.7j])
    assert embedding_constant(trivial_e, 2, grid).value == pytest.approx(3 / math.pi)
    m8 = embedding_constant(torus_e8, 2, grid).value
    m10 = embedding_constant(torus_e10, 2, grid).value
    assert m10 == pytest.approx(m8, rel=0.05)
    assert m8 >= 3 / math.pi
