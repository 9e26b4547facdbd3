"""symcurv: elementary-symmetric-polynomial operators, their cones and
concavity properties, and a prescribed-curvature solver on starshaped
surfaces.

Modules
-------
symfun     calculus of elementary symmetric polynomials
combop     linear-combination operators, profiles, derived lower operators
cones      Garding / admissible cone membership, sampling, convexity checks
hypcheck   exact hyperbolicity decision and witness recovery
concave    midpoint / finite-difference concavity verification
geomsolve  radial-graph geometry, Newton and homotopy solvers
cli        batch front end (config file in, reports + CSV out)
"""

from . import symfun, combop, cones, hypcheck, concave, geomsolve, cli  # noqa: F401
from .combop import OperatorSpec
from .cones import ConeSpec, VerificationReport

__version__ = "0.1.0"

__all__ = [
    "symfun",
    "combop",
    "cones",
    "hypcheck",
    "concave",
    "geomsolve",
    "cli",
    "OperatorSpec",
    "ConeSpec",
    "VerificationReport",
]
