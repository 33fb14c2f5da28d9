import math

import numpy as np
import pytest

from conftest import random_disc_points
from uniformizer.analysis import FormSpec, automorphy_residual, theta_series
from uniformizer.errors import ContourEscapeError, DomainError
from uniformizer.factors import canonical_factor
from uniformizer.families import (
    FamilyPath,
    annulus_core_length,
    extended_section,
    gram_matrix,
    plumbing_length,
    plumbing_parameter,
    rank_drop_scan,
    wronskian,
)
from uniformizer.fuchsian import enumerate_elements, trivial_group


@pytest.fixture(scope="module")
def pinch():
    return FamilyPath.pinch(2, [[1], [0, 1]])


def test_path_validation(torus):
    with pytest.raises(DomainError):
        FamilyPath.pinch(1.5, [[1]])
    with pytest.raises(DomainError):
        FamilyPath.pinch(2, [])
    with pytest.raises(DomainError):
        FamilyPath.pinch(2, [[1]], u_min=1, u_max=0.5)
    P = FamilyPath.pinch(2, [[1]])
    with pytest.raises(DomainError):
        P.fibre(0)
    assert P.fibre_dimension(1) == 1


def test_constant_path_matches_theta_series(torus):
    P = FamilyPath.constant(torus, 2, [[1, 0.5j]], max_word_length=6)
    E = enumerate_elements(torus, 6)
    F = FormSpec([1, 0.5j], canonical_factor(torus, 2), E)
    for u in (0.2, 1.0):
        for z in (0.0, 0.3 - 0.4j):
            got = extended_section(P, 0, u, z)
            ref = theta_series(F, z)
            assert got.value == ref.value
            assert got.error == ref.tail


def test_twisted_constant_path_is_conjugate(torus):
    # for the rotated group, Theta[1] at R z is Theta[1] at z times a unimodular constant
    phi = 0.7
    P = FamilyPath.constant(torus, 2, [[1]], twist=phi, max_word_length=6)
    Q = FamilyPath.constant(torus, 2, [[1]], max_word_length=6)
    z = 0.2 + 0.1j
    rot = extended_section(P, 0, 1.0, z * np.exp(1j * phi)).value
    base = extended_section(Q, 0, 1.0, z).value
    assert abs(rot) == pytest.approx(abs(base), rel=1e-9)


def test_section_continuity(pinch):
    z = np.array([0.0, 0.2 + 0.3j, -0.4j])
    u = 0.5
    prev = None
    for d in (1e-2, 1e-3, 1e-4):
        diff = np.max(np.abs(extended_section(pinch, 0, u + d, z).value
                             - extended_section(pinch, 0, u, z).value))
        if prev is not None:
            assert diff < prev
        prev = diff
    assert prev < 1e-3


@pytest.mark.parametrize("u", [1.0, 0.5, 0.1])
def test_fibre_automorphy(pinch, u, rng):
    G, E, rho = pinch.fibre(u)
    F = FormSpec(list(pinch.seeds[1]), rho, E)
    z = random_disc_points(rng, 20, 0.6)
    for w in "ab":
        res, bound = automorphy_residual(F, w, z)
        assert np.all(res <= 10 * bound)


def test_gram_examples(torus):
    one = gram_matrix(FamilyPath.pinch(2, [[1]]), 1.0)
    assert one.matrix.shape == (1, 1) and one.matrix[0, 0].real > 0
    two = gram_matrix(FamilyPath.pinch(2, [[1], [0, 1]]), 1.0)
    assert np.max(np.abs(two.matrix - two.matrix.conj().T)) <= 1e-10
    assert two.positive_semidefinite
    four = gram_matrix(FamilyPath.pinch(2, [[1], [0, 1], [0, 0, 1], [0, 0, 0, 1]],
                                        max_word_length=10), 1.0)
    assert four.rank == 1 == FamilyPath.pinch(2, [[1]]).fibre_dimension(1.0)
    assert four.positive_semidefinite


def test_gram_rank_weight_three():
    rep = gram_matrix(FamilyPath.pinch(3, [[0] * k + [1] for k in range(6)],
                                       max_word_length=10), 1.0)
    assert rep.rank == 2
    assert rep.positive_semidefinite


def test_odd_seed_vanishes_on_weight_three(torus):
    # z -> -z normalizes the fixture group, so Theta[z] = 0 when s = 3
    rep = gram_matrix(FamilyPath.constant(torus, 3, [[0, 1]], max_word_length=10), 1.0)
    assert rep.rank == 0 and rep.eigenvalues[0] <= rep.error


def test_gram_with_disc_rule_agrees(torus):
    from uniformizer.quadrature import disc_quadrature

    P = FamilyPath.pinch(2, [[1], [0, 1]], max_word_length=6)
    exact = gram_matrix(P, 1.0)
    ruled = gram_matrix(P, 1.0, Q=disc_quadrature(48, 48))
    assert np.max(np.abs(exact.matrix - ruled.matrix)) <= np.max(exact.entry_errors + ruled.entry_errors)


def test_wronskian_examples(torus):
    triv = FamilyPath.constant(trivial_group(), 2, [[1]], max_word_length=0)
    assert wronskian(triv, 1.0, N=1) == pytest.approx(1)
    triv2 = FamilyPath.constant(trivial_group(), 2, [[1], [0, 1], [0, 0, 1]], max_word_length=0)
    assert wronskian(triv2, 1.0, 0.1) == pytest.approx(2)
    dup = FamilyPath.pinch(2, [[1, 0.3], [1, 0.3]], max_word_length=6)
    for u in (1.0, 0.3):
        assert abs(wronskian(dup, u)) <= 1e-10
    with pytest.raises(ContourEscapeError):
        wronskian(dup, 1.0, z0=0.6)


def test_wronskian_nonvanishing_on_path():
    P = FamilyPath.pinch(3, [[1], [0, 1]], max_word_length=6)
    vals = [abs(wronskian(P, u)) for u in np.linspace(0.5, 1.0, 6)]
    assert min(vals) > 1e-3 * max(vals) > 0


def test_rank_drop_scan_examples(torus):
    const = FamilyPath.constant(torus, 3, [[1], [0, 0, 1]], max_word_length=8)
    scan = rank_drop_scan(const, 3)
    assert [r.rank for r in scan] == [2, 2, 2] and not any(r.drop for r in scan)
    single = FamilyPath.pinch(2, [[1]], max_word_length=8)
    assert all(r.rank == 1 for r in rank_drop_scan(single, 4))
    surplus = rank_drop_scan(FamilyPath.pinch(2, [[1], [0, 1]], max_word_length=8), 3)
    for r in surplus:
        assert r.rank == 1 and r.expected == 1 and r.surplus == 1 and not r.drop
    with pytest.raises(DomainError):
        rank_drop_scan(single, 1)


def test_plumbing_examples():
    # mpmath: exp(-2 pi^2)
    assert plumbing_parameter(1) == pytest.approx(2.67528799107423968124e-9, rel=1e-14)
    assert plumbing_length(2.67528799107423968124e-9) == pytest.approx(1, rel=1e-13)
    ts = np.geomspace(1e-12, 0.99, 50)
    lengths = [plumbing_length(t) for t in ts]
    assert np.all(np.diff(lengths) > 0)
    for t in ts:
        assert plumbing_length(t) == pytest.approx(annulus_core_length(t), rel=1e-12)
        assert plumbing_length(t * 1j) == plumbing_length(t)
    # below about 0.027 the parameter underflows double precision
    for ell in (0.03, 0.5, 1, 7, 40):
        assert plumbing_length(plumbing_parameter(ell)) == pytest.approx(ell, rel=1e-12)
    assert plumbing_parameter(1e-3) == 0.0
    with pytest.raises(DomainError):
        plumbing_length(1)
    with pytest.raises(DomainError):
        plumbing_parameter(0)
