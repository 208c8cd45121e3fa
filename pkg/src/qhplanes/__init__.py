"""Exact weighted dual-graph calculus for singular Q-homology planes."""

__version__ = "0.1.0"

from .graph import WeightedGraph, Chain, discriminant, e_invariant, tilde_e, hirzebruch_jung  # noqa: E402
from .birational import BlowupStep, blowup, blowdown, standardize, is_standard, is_strongly_balanced  # noqa: E402
from .fibration import FiberTree, fiber_from_history, validate_fiber, columnar_from_tilde_e  # noqa: E402
from .qhp import (  # noqa: E402
    SurfaceModel,
    analyze,
    construct_affine_ruled,
    construct_cstar,
    construct_nonextendable,
    verify_qacyclicity,
)
