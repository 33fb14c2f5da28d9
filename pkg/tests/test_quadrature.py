import math

import numpy as np
import pytest

from uniformizer.errors import DomainError
from uniformizer.quadrature import QuadratureDomain, disc_quadrature, monte_carlo_disc


def test_disc_rule_integrates_polynomials_in_r2():
    Q = disc_quadrature()
    # integral of |z|^2 over the disc is pi/2; the cut annulus is sech(8)^2 small
    assert Q.sum(np.abs(Q.nodes) ** 2).real == pytest.approx(math.pi / 2, rel=1e-6)
    assert Q.sum(np.ones(len(Q))).real == pytest.approx(math.pi, rel=1e-6)


def test_disc_rule_tail_and_companion():
    Q = disc_quadrature(32, 32, rho_max=4)
    assert Q.tail["excluded_euclidean_area"] == pytest.approx(math.pi / math.cosh(4) ** 2)
    assert len(Q.companion) == 16 * 16
    assert Q.error_estimate >= 0


def test_refinement_doubles_everything():
    Q = disc_quadrature(16, 16, rho_max=3)
    F = Q.refined()
    assert len(F) == 4 * len(Q)
    assert F.tail["rho_max"] == 6


def test_monte_carlo_is_seeded():
    a = monte_carlo_disc(2000, seed=3)
    b = monte_carlo_disc(2000, seed=3)
    c = monte_carlo_disc(2000, seed=4)
    assert np.array_equal(a.nodes, b.nodes)
    assert not np.array_equal(a.nodes, c.nodes)
    assert a.tail["seed"] == 3
    big = monte_carlo_disc(200_000, seed=1)
    assert big.sum(np.ones(len(big))).real == pytest.approx(math.pi, rel=2e-2)


def test_domain_validation():
    with pytest.raises(DomainError):
        QuadratureDomain(np.array([1.0 + 0j]), np.array([1.0]))
    with pytest.raises(DomainError):
        QuadratureDomain(np.array([0.1 + 0j]), np.array([-1.0]))
    with pytest.raises(DomainError):
        disc_quadrature(4, 16)
    with pytest.raises(DomainError):
        QuadratureDomain(np.array([0.1 + 0j]), np.array([1.0])).refined()
