"""Exact verification of the S/D independence characterisation.

For iid ``xi, eta`` the pair ``S = xi + eta``, ``D = (xi - eta)^2`` is
independent exactly for shifted Haar laws of subgroups (odd characteristic),
only for degenerate laws over the rationals, and the p-adic picture is
checked through finite residue models.
"""
from .algebra import RingSpec, SubgroupSpec
from .characterize import Report, feq_check
from .measure import Dist, JointDist, StepDensity, classify, is_independent, push_T
from .padic import PAdic, sqrt_hensel, sqrt_series

__all__ = [
    "Dist",
    "JointDist",
    "PAdic",
    "Report",
    "RingSpec",
    "StepDensity",
    "SubgroupSpec",
    "classify",
    "feq_check",
    "is_independent",
    "push_T",
    "sqrt_hensel",
    "sqrt_series",
]
__version__ = "0.1.0"
