"""Numerical tools for Fuchsian uniformizations of Riemann surfaces.

The subpackages are layered: :mod:`moebius` (maps and disc geometry),
:mod:`fuchsian` (groups, enumeration, fundamental domains), :mod:`factors`
(factors of automorphy), :mod:`analysis` (norms, kernels, Poincare series),
:mod:`dimensions` (closed-form counts) and :mod:`families` (sections along
deformation paths). :mod:`cli` exposes them as batch commands.
"""

from ._common import Estimate

__version__ = "0.1.0"

__all__ = ["Estimate", "__version__"]
