"""Weighted node sets on the disc.

A :class:`QuadratureDomain` carries nodes, positive Euclidean-area weights,
a description of any region left out, and a half-resolution companion rule
used for error estimates. Two families of rules live here: a tensor rule on
the whole disc (Gauss-Legendre panels in the hyperbolic radius times the
trapezoid rule in angle) and a seeded Monte-Carlo fallback. Grids on
fundamental domains are built in :mod:`uniformizer.fuchsian`.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._common import Estimate
from .errors import DomainError

__all__ = ["QuadratureDomain", "disc_quadrature", "monte_carlo_disc"]


@dataclass(frozen=True, eq=False)
class QuadratureDomain:
    """Nodes in the disc with positive Euclidean-area weights.

    Attributes
    ----------
    nodes, weights : ndarray
        Complex nodes and their weights (``sum(weights * f(nodes))``
        approximates ``integral f d^2z``).
    tail : dict
        Description of the region the rule leaves out.
    error_estimate : float
        Change of the rule's reference integral against the companion.
    companion : QuadratureDomain, optional
        Coarser rule over the same region.
    refiner : callable, optional
        Builds the next finer rule of the same family.
    """

    nodes: np.ndarray
    weights: np.ndarray
    tail: dict = field(default_factory=dict)
    error_estimate: float = 0.0
    companion: Optional["QuadratureDomain"] = None
    refiner: Optional[Callable[[], "QuadratureDomain"]] = None
    label: str = ""

    def __post_init__(self):
        nodes = np.ascontiguousarray(self.nodes, dtype=complex).ravel()
        weights = np.ascontiguousarray(self.weights, dtype=float).ravel()
        if nodes.shape != weights.shape:
            raise DomainError("nodes and weights differ in length")
        if np.any(np.abs(nodes) >= 1):
            raise DomainError("quadrature nodes must lie in the open disc")
        if np.any(weights <= 0):
            raise DomainError("quadrature weights must be positive")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return self.nodes.size

    @property
    def density(self):
        """``lambda`` at the nodes."""
        return 1.0 / (1.0 - np.abs(self.nodes) ** 2)

    def sum(self, values):
        return complex(np.dot(self.weights, np.asarray(values)))

    def integrate(self, f):
        """Integrate a vectorized ``f`` against ``d^2z``.

        The error is the difference to the companion rule, or 0 if there is
        none.
        """
        value = self.sum(f(self.nodes))
        if self.companion is None:
            return Estimate(value, 0.0)
        coarse = self.companion.sum(f(self.companion.nodes))
        return Estimate(value, float(abs(value - coarse)))

    def refined(self):
        if self.refiner is None:
            raise DomainError("this rule has no refinement")
        return self.refiner()


def _radial_rule(radial_nodes, rho_max, per_panel):
    panels = max(1, radial_nodes // per_panel)
    x, w = np.polynomial.legendre.leggauss(per_panel)
    edges = np.linspace(0.0, rho_max, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    rho = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wr = (half[:, None] * w[None, :]).ravel()
    return rho, wr


def disc_quadrature(radial_nodes=64, angular_nodes=64, rho_max=8.0, per_panel=8,
                    companion=True):
    """Tensor rule on the whole disc in hyperbolic polar coordinates.

    With ``z = tanh(rho) e^{i theta}`` the area element is
    ``tanh(rho) sech(rho)^2 d rho d theta``. The radius is cut at ``rho_max``,
    which leaves out an annulus of Euclidean area ``pi sech(rho_max)^2``.

    Parameters
    ----------
    radial_nodes : int
        Total Gauss-Legendre nodes in ``rho``, grouped in panels.
    angular_nodes : int
        Trapezoid nodes in ``theta``.
    rho_max : float
        Outer hyperbolic radius.
    per_panel : int
        Nodes per Gauss-Legendre panel.
    companion : bool
        Also build the half-resolution rule for error estimates.

    Notes
    -----
    ``refined()`` doubles both node counts and ``rho_max``, so a divergent
    integrand (the ``s = 1`` Poincare mass) keeps growing under refinement.
    """
    if radial_nodes < per_panel or angular_nodes < 4:
        raise DomainError("too few nodes")
    if rho_max <= 0:
        raise DomainError("rho_max must be positive")
    rho, wr = _radial_rule(radial_nodes, rho_max, per_panel)
    theta = 2 * np.pi * (np.arange(angular_nodes) + 0.5) / angular_nodes
    r = np.tanh(rho)
    jac = r / np.cosh(rho) ** 2
    nodes = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    weights = ((wr * jac)[:, None] * np.full(angular_nodes, 2 * np.pi / angular_nodes)).ravel()
    comp = None
    err = 0.0
    if companion:
        comp = disc_quadrature(max(per_panel, radial_nodes // 2), max(4, angular_nodes // 2),
                               rho_max, per_panel, companion=False)
        err = abs(weights.sum() - comp.weights.sum())
    tail = {
        "kind": "outer annulus",
        "rho_max": float(rho_max),
        "excluded_euclidean_area": float(np.pi / np.cosh(rho_max) ** 2),
    }

    def refiner():
        return disc_quadrature(2 * radial_nodes, 2 * angular_nodes, 2 * rho_max, per_panel,
                               companion)

    return QuadratureDomain(nodes, weights, tail, float(err), comp, refiner,
                            f"disc {radial_nodes}x{angular_nodes}, rho_max={rho_max:g}")


def monte_carlo_disc(samples=20000, seed=0, rho_max=8.0, companion=True):
    """Monte-Carlo rule on the disc, uniform in hyperbolic radius and angle.

    Each node carries the weight ``2 pi rho_max tanh(rho) sech(rho)^2 / n``,
    which makes the rule an unbiased estimator on ``|z| < tanh(rho_max)``.
    The companion uses the first half of the same sample stream.
    """
    if samples < 2:
        raise DomainError("need at least two samples")
    rng = np.random.default_rng(seed)
    rho = rng.uniform(0.0, rho_max, samples)
    theta = rng.uniform(0.0, 2 * np.pi, samples)
    r = np.tanh(rho)
    keep = r > 0
    nodes = (r * np.exp(1j * theta))[keep]
    weights = (2 * np.pi * rho_max * r / np.cosh(rho) ** 2 / samples)[keep]
    comp = None
    err = 0.0
    if companion:
        half = samples // 2
        comp = QuadratureDomain(nodes[:half], weights[:half] * samples / half,
                                label="monte-carlo companion")
        err = abs(weights.sum() - comp.weights.sum())
    tail = {
        "kind": "outer annulus",
        "rho_max": float(rho_max),
        "excluded_euclidean_area": float(np.pi / np.cosh(rho_max) ** 2),
        "seed": int(seed),
    }

    def refiner():
        return monte_carlo_disc(4 * samples, seed, 2 * rho_max, companion)

    return QuadratureDomain(nodes, weights, tail, float(err), comp, refiner,
                            f"monte-carlo n={samples}, seed={seed}")
