"""End-to-end numerical check of the classifier on a disk model.

Runs the trivial-branch scan, switches onto every detected branch and
compares the outcome with ``classify``:

* every detection must sit at a predicted level;
* every predicted level whose crossing modes lie inside the basis must be detected;
* where the classifier says radial-only, traced branches must stay radial;
* where it says symmetry breaking, some traced branch must leave the radial class.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..bifurcation_classifier import YES, ClassificationRecord, classify, lambda_candidates
from ..errors import BranchSwitchError
from ..neumann_spectrum import eigenvalues_up_to
from ..operator_spectrum import matrix_spectrum
from .basis import DiskBasis
from .model import ModelPotential
from .verifier import (
    RADIAL_THRESHOLD,
    Branch,
    StepPolicy,
    continue_trivial_and_detect,
    isotropy_signature,
    kernel_directions,
    switch_branch,
)

log = logging.getLogger(__name__)

MATCH_TOL = 1e-6
ONSET_POINTS = 3
ROOT_TOL = 1e-8


@dataclass
class CandidateReport:
    lambda0: float
    record: ClassificationRecord
    representable: bool
    detected: Optional[float] = None
    branches: list[int] = field(default_factory=list)
    status: str = ""


@dataclass
class VerificationReport:
    trivial: Branch
    detections: list[float]
    candidates: list[CandidateReport]
    branches: list[Branch]
    disagreements: list[str]
    notes: list[str]

    @property
    def agreement(self) -> bool:
        return not self.disagreements

    def summary(self) -> dict:
        return {
            "agreement": self.agreement,
            "detections": self.detections,
            "candidates": [
                {"lambda0": c.lambda0, "representable": c.representable, "detected": c.detected,
                 "fired": c.record.fired(), "radial_only": c.record.radial_only,
                 "symmetry_breaking": c.record.symmetry_breaking, "branches": c.branches, "status": c.status}
                for c in self.candidates
            ],
            "disagreements": self.disagreements,
            "notes": self.notes,
        }


def auto_beta_max(alphas: Sequence[float], lambda_range: Sequence[float]) -> float:
    need = max(0.0, max(lam * a for lam in lambda_range for a in alphas))
    return max(1.25 * need, need + 1.0)


def _representable(record_entries, basis: DiskBasis) -> bool:
    for entry in record_entries:
        if entry.gamma == 0.0:
            continue
        for degree, _ in entry.decomposition.blocks:
            if not any(mode.degree == degree and abs(mode.beta - entry.gamma) <= ROOT_TOL * (1.0 + entry.gamma)
                       for mode in basis.modes):
                return False
    return True


def _directions_by_degree(model, basis, lam: float) -> list[tuple[int, np.ndarray]]:
    """One near-kernel direction per dominant angular degree."""
    K = kernel_directions(model, basis, lam)
    seen: dict[int, np.ndarray] = {}
    for j in range(K.shape[1]):
        degree = isotropy_signature(basis, K[:, j]).dominant_degree
        seen.setdefault(degree, K[:, j])
    return sorted(seen.items())


def run_verification(model: ModelPotential, l_max: int, m_max: int, lambda_range: Sequence[float],
                     beta_max: Optional[float] = None, step_policy: StepPolicy = StepPolicy(),
                     threads: int = 1) -> VerificationReport:
    basis = DiskBasis(l_max, m_max, model.m, nonlinear_degree=max(4, model.degree))
    spec = matrix_spectrum(model.hessian_at_u0())
    lo, hi = float(lambda_range[0]), float(lambda_range[1])
    if beta_max is None:
        beta_max = auto_beta_max(spec.alphas, (lo, hi))
    eigs = eigenvalues_up_to(2, beta_max, threads=threads)
    candidates = [CandidateReport(c.lambda0, classify(c, spec, eigs), _representable(c.intersected, basis))
                  for c in lambda_candidates(spec, eigs, lo, hi) if lo < c.lambda0 < hi]

    trivial, detections = continue_trivial_and_detect(model, basis, (lo, hi), step_policy)
    disagreements: list[str] = []
    notes: list[str] = []
    branches: list[Branch] = []

    for lam in detections:
        match = [c for c in candidates if abs(c.lambda0 - lam) <= MATCH_TOL * (1.0 + abs(c.lambda0))]
        if not match:
            disagreements.append(f"detection at {lam!r} matches no predicted level")
            continue
        match[0].detected = lam

    for cand in candidates:
        if cand.detected is None:
            if cand.representable:
                disagreements.append(f"predicted level {cand.lambda0!r} was not detected")
                cand.status = "missed"
            else:
                cand.status = "unrepresentable at cutoff"
            continue
        if not cand.representable:
            cand.status = "detected; crossing only partly representable at cutoff"
            continue
        if cand.lambda0 == 0.0:
            cand.status = "detected; no branch traced at 0, every constant is critical there"
            continue
        radial_seen, nonradial_seen = [], []
        for index, (degree, direction) in enumerate(_directions_by_degree(model, basis, cand.detected)):
            try:
                branch = switch_branch(model, basis, cand.detected, direction, step_policy=step_policy,
                                       kernel_index=index)
            except BranchSwitchError as exc:
                notes.append(f"level {cand.lambda0!r}, degree {degree}: {exc}")
                continue
            branches.append(branch)
            cand.branches.append(len(branches))
            onset = [p.isotropy.radial_energy_fraction for p in branch.points[:ONSET_POINTS]]
            (radial_seen if min(onset) > RADIAL_THRESHOLD else nonradial_seen).append(degree)
        rec = cand.record
        if not cand.branches:
            cand.status = "detected; branch not traced"
        elif rec.radial_only and nonradial_seen:
            disagreements.append(f"level {cand.lambda0!r} predicted radial but traced degrees {nonradial_seen}")
            cand.status = "isotropy disagreement"
        elif rec.symmetry_breaking == YES and not nonradial_seen:
            disagreements.append(f"level {cand.lambda0!r} predicted symmetry breaking but all branches radial")
            cand.status = "isotropy disagreement"
        else:
            cand.status = "confirmed"
    return VerificationReport(trivial, detections, candidates, branches, disagreements, notes)

