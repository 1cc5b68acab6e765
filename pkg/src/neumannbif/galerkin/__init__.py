"""Spectral Galerkin verification on the unit disk."""

from .basis import DiskBasis, build_basis
from .model import ModelPotential
from .pipeline import VerificationReport, run_verification
from .verifier import (
    Branch,
    BranchPoint,
    IsotropySignature,
    StepPolicy,
    continue_trivial_and_detect,
    eval_gradient,
    eval_hessian,
    functional_value,
    isotropy_signature,
    kernel_directions,
    newton_correct,
    switch_branch,
)
