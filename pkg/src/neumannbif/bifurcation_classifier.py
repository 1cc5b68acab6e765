"""Candidate bifurcation levels and their classification.

A level lambda0 can only be a bifurcation point of the trivial family if
beta_k = lambda0 * alpha_j for some nonzero eigenvalue alpha_j of A and some
Neumann eigenvalue beta_k.  At such a level three sufficient conditions are
checked:

* C1: lambda0 != 0 and some crossing eigenspace has dimension > 1;
* C2: lambda0 != 0, all crossing eigenspaces are one-dimensional and the
  kernel normal to the orbit has odd dimension;
* C3: lambda0 == 0 and the signature of A is odd.

Each is computed twice, from dimensions and from representation data, and
the two computations must agree.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InsufficientCutoffError, InternalConsistencyError
from .neumann_spectrum import EigenvalueList
from .operator_spectrum import (
    KernelEntry,
    MatrixSpectrum,
    check_cutoff,
    kernel_description,
    matrix_spectrum,
)

log = logging.getLogger(__name__)

DEDUP_TOL = 1e-8
EPS_FLOOR = 1e-6
NULL_TOL = 1e-8

YES = "yes"
NOT_IMPLIED = "not-implied"
NOT_APPLICABLE = "not-applicable"


@dataclass(frozen=True)
class BifurcationCandidate:
    lambda0: float
    witnesses: tuple[tuple[float, float], ...]
    intersected: tuple[KernelEntry, ...]
    merged: bool = False


@dataclass(frozen=True)
class ClassificationRecord:
    lambda0: float
    c1: bool
    c2: bool
    c3: bool
    thm0: bool
    local_bifurcation: bool
    global_bifurcation: bool
    symmetry_breaking: str
    radial_only: bool
    kernel_dim_normal: int
    explanation: tuple[dict, ...] = field(default=())

    def fired(self) -> list[str]:
        return [name for name in ("c1", "c2", "c3", "thm0") if getattr(self, name)]


def _lambda_values(spec: MatrixSpectrum, eigs: EigenvalueList):
    for space in eigs.distinct():
        for e in spec.eigenvalues:
            if e.alpha != 0.0:
                yield space.beta / e.alpha, e.alpha, space.beta


def lambda_candidates(spec: MatrixSpectrum, eigs: EigenvalueList, lo: float, hi: float) -> list[BifurcationCandidate]:
    """Elements of Lambda in [lo, hi], ascending, each with its crossing data."""
    if not lo <= hi:
        raise ValueError(f"empty range [{lo}, {hi}]")
    check_cutoff(spec, eigs, [lo, hi])
    raw = sorted((v for v in _lambda_values(spec, eigs) if lo <= v[0] <= hi),
                 key=lambda v: (v[0], v[1]))
    groups: list[list[tuple[float, float, float]]] = []
    for item in raw:
        if groups and abs(item[0] - groups[-1][0][0]) <= DEDUP_TOL * (1.0 + abs(groups[-1][0][0])):
            groups[-1].append(item)
        else:
            groups.append([item])
    out = []
    for g in groups:
        lam0 = 0.0 if any(v[0] == 0.0 for v in g) else g[0][0]
        witnesses = tuple((a, b) for _, a, b in g)
        distinct_quotients = {v[0] for v in g}
        merged = len(distinct_quotients) > 1 and lam0 != 0.0
        if merged:
            log.warning("distinct quotients merged into one candidate near %s: %s", lam0, sorted(distinct_quotients))
        out.append(BifurcationCandidate(lam0, witnesses, tuple(kernel_description(spec, eigs, lam0)), merged))
    return out


def separation_epsilon(lambda0: float, spec: MatrixSpectrum, eigs: EigenvalueList) -> float:
    """Half the gap to the nearest other element of Lambda, floored at 1e-6.

    Also capped so that [lambda0 - eps, lambda0 + eps] stays inside the range
    where the enumerated Laplacian spectrum is complete.
    """
    tol = DEDUP_TOL * (1.0 + abs(lambda0))
    gaps = [abs(v - lambda0) for v, _, _ in _lambda_values(spec, eigs) if abs(v - lambda0) > tol]
    eps = max(0.5 * min(gaps), EPS_FLOOR) if gaps else 1.0
    cap = np.inf
    for a in spec.alphas:
        if a > 0:
            cap = min(cap, eigs.beta_max / a - lambda0)
        elif a < 0:
            cap = min(cap, lambda0 - eigs.beta_max / a)
    if cap <= 0:
        raise InsufficientCutoffError(f"no enumerated neighbourhood around lambda0={lambda0}")
    if eps >= cap:
        eps = 0.5 * cap
        if eps < EPS_FLOOR:
            raise InsufficientCutoffError(
                f"Laplacian cutoff {eigs.beta_max} too small to separate lambda0={lambda0}")
    return float(eps)


def classify(candidate: BifurcationCandidate, spec: MatrixSpectrum, eigs: EigenvalueList,
             check_euler: bool = True) -> ClassificationRecord:
    """Decide C1-C3 and the lambda0 = 0 condition, and derive the bifurcation verdicts."""
    lam0 = candidate.lambda0
    entries = candidate.intersected
    zero = lam0 == 0.0
    dim_ker_a = spec.kernel_dim
    kernel_total = sum(e.dim for e in entries)
    kernel_dim_normal = kernel_total - dim_ker_a
    nonzero = [e for e in entries if e.gamma != 0.0]
    trace: list[dict] = []

    all_dims_one = all(e.decomposition.total_dim == 1 for e in entries)
    c1 = not zero and not all_dims_one
    c1_rep = not zero and any(any(d >= 1 for d in e.decomposition.degrees) for e in entries)
    c2 = not zero and all_dims_one and kernel_dim_normal % 2 == 1
    c2_rep = not zero and all_dims_one and (sum(e.mu for e in entries) - dim_ker_a) % 2 == 1
    signature = spec.positive_count - spec.negative_count
    c3 = zero and signature % 2 == 1
    c3_rep = zero and (spec.size_m - dim_ker_a) % 2 == 1
    thm0 = zero and signature != 0
    for name, a, b in (("C1", c1, c1_rep), ("C2", c2, c2_rep), ("C3", c3, c3_rep)):
        if a != b:
            raise InternalConsistencyError(f"{name} and its reformulation disagree at lambda0={lam0}")

    if zero:
        trace.append({"clause": "C3", "fired": c3,
                      "detail": f"signature {spec.positive_count} - {spec.negative_count} = {signature}"})
        trace.append({"clause": "thm0", "fired": thm0,
                      "detail": "local bifurcation at 0 from a nonzero signature"})
        if thm0 and not c3:
            trace.append({"clause": "note", "fired": False,
                          "detail": "even nonzero signature: globality at 0 is not decided"})
    else:
        dims = [(e.gamma, e.decomposition.total_dim, e.mu) for e in entries]
        trace.append({"clause": "C1", "fired": c1, "detail": f"crossing eigenspaces (beta, dim, mu): {dims}"})
        trace.append({"clause": "C2", "fired": c2, "detail": f"normal kernel dimension {kernel_dim_normal}"})

    global_bif = c1 or c2 or c3
    local_bif = global_bif or thm0
    radial_only = all(e.decomposition.total_dim == 1 for e in nonzero)
    if not nonzero:
        trace.append({"clause": "radial", "fired": True, "detail": "degenerate: no nonzero crossing"})
    else:
        trace.append({"clause": "radial", "fired": radial_only,
                      "detail": "every crossing eigenspace is a trivial representation"})
    if radial_only:
        symmetry = NOT_APPLICABLE
    elif global_bif and all(e.decomposition.fixed_dim == 0 for e in nonzero):
        symmetry = YES
    else:
        symmetry = NOT_IMPLIED
    trace.append({"clause": "symmetry_breaking", "fired": symmetry == YES, "detail": symmetry})

    if check_euler and eigs.N == 2 and not zero:
        from .euler_ring import index_change_witness

        witness = index_change_witness(candidate, spec, eigs, separation_epsilon(lam0, spec, eigs))
        if witness != (c1 or c2):
            raise InternalConsistencyError(
                f"Euler-characteristic witness {witness} disagrees with C1 or C2 at lambda0={lam0}")
        trace.append({"clause": "euler_witness", "fired": witness, "detail": "U(SO(2)) comparison"})

    return ClassificationRecord(
        lambda0=lam0, c1=c1, c2=c2, c3=c3, thm0=thm0,
        local_bifurcation=local_bif, global_bifurcation=global_bif,
        symmetry_breaking=symmetry, radial_only=radial_only,
        kernel_dim_normal=kernel_dim_normal, explanation=tuple(trace),
    )


def symmetry_breaking_test(candidate: BifurcationCandidate, spec: MatrixSpectrum, eigs: EigenvalueList) -> str:
    return classify(candidate, spec, eigs, check_euler=False).symmetry_breaking


def radial_only_test(candidate: BifurcationCandidate, spec: MatrixSpectrum, eigs: EigenvalueList) -> bool:
    return all(e.decomposition.total_dim == 1 for e in candidate.intersected if e.gamma != 0.0)


def nondegenerate_orbit_check(hessian_at_u0, orbit_dim: int) -> bool:
    """True iff dim ker of the Hessian equals the orbit dimension."""
    spec = matrix_spectrum(hessian_at_u0)
    norm = max(abs(a) for a in spec.alphas)
    tol = NULL_TOL * (1.0 + norm)
    null = sum(e.multiplicity for e in spec.eigenvalues if abs(e.alpha) <= tol)
    return null == orbit_dim


def classify_range(spec: MatrixSpectrum, eigs: EigenvalueList, lo: float, hi: float,
                   check_euler: bool = True) -> list[ClassificationRecord]:
    return [classify(c, spec, eigs, check_euler) for c in lambda_candidates(spec, eigs, lo, hi)]
