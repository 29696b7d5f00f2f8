"""Reachability certificates and the planners that build them."""

from .certificate import Infeasible, JumpChainCertificate, smallest_m
from .planners import (
    alignment,
    frame_radii,
    greedy_length_bound,
    plan_additive,
    plan_coordinatewise,
    plan_greedy_frame,
    plan_one_step_inverse,
    probe_condition_I,
    replay,
)
from .verify import VerificationReport, allocate_radii, structural_failures, verify_certificate

__all__ = [
    "Infeasible", "JumpChainCertificate", "smallest_m", "alignment", "frame_radii",
    "greedy_length_bound", "plan_additive", "plan_coordinatewise", "plan_greedy_frame",
    "plan_one_step_inverse", "probe_condition_I", "replay", "VerificationReport",
    "allocate_radii", "structural_failures", "verify_certificate",
]
