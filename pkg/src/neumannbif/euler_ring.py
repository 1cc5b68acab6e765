"""Arithmetic in the Euler ring U(SO(2)) and Euler characteristics of representation spheres.

An element is ``a0 * I + sum_k a_k * u_k`` where ``I`` is the class of
SO(2)/SO(2)^+ and ``u_k`` the class of (SO(2)/Z_k)^+.  Products of two
orbit generators vanish, so

    (a0; a_k) * (b0; b_k) = (a0 b0; a0 b_k + b0 a_k).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .errors import DomainError
from .neumann_spectrum import EigenvalueList
from .operator_spectrum import MatrixSpectrum, check_cutoff, _intersects


def _prune(coeffs: Mapping[int, int]) -> tuple[tuple[int, int], ...]:
    for k in coeffs:
        if k < 1:
            raise DomainError(f"orbit generators are indexed by k >= 1, got {k}")
    return tuple(sorted((int(k), int(v)) for k, v in coeffs.items() if v != 0))


@dataclass(frozen=True)
class EulerElement:
    unit_coeff: int = 0
    orbit_coeffs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "orbit_coeffs", _prune(dict(self.orbit_coeffs)))

    @classmethod
    def unit(cls) -> "EulerElement":
        return cls(1)

    @classmethod
    def generator(cls, k: int) -> "EulerElement":
        return cls(0, ((k, 1),))

    def coeff(self, k: int) -> int:
        return dict(self.orbit_coeffs).get(k, 0)

    def __add__(self, other: "EulerElement") -> "EulerElement":
        merged = dict(self.orbit_coeffs)
        for k, v in other.orbit_coeffs:
            merged[k] = merged.get(k, 0) + v
        return EulerElement(self.unit_coeff + other.unit_coeff, tuple(merged.items()))

    def __neg__(self) -> "EulerElement":
        return EulerElement(-self.unit_coeff, tuple((k, -v) for k, v in self.orbit_coeffs))

    def __sub__(self, other: "EulerElement") -> "EulerElement":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return EulerElement(other * self.unit_coeff, tuple((k, other * v) for k, v in self.orbit_coeffs))
        a0, b0 = self.unit_coeff, other.unit_coeff
        merged: dict[int, int] = {}
        for k, v in other.orbit_coeffs:
            merged[k] = merged.get(k, 0) + a0 * v
        for k, v in self.orbit_coeffs:
            merged[k] = merged.get(k, 0) + b0 * v
        return EulerElement(a0 * b0, tuple(merged.items()))

    __rmul__ = __mul__

    def __str__(self) -> str:
        parts = [f"{self.unit_coeff}*I"] + [f"{v:+d}*u_{k}" for k, v in self.orbit_coeffs]
        return " ".join(parts)


def ring_add(a: EulerElement, b: EulerElement) -> EulerElement:
    return a + b


def ring_mul(a: EulerElement, b: EulerElement) -> EulerElement:
    return a * b


@dataclass(frozen=True)
class So2RepDecomposition:
    """Real SO(2)-representation: ``trivial_dim`` trivial lines plus rotation planes by weight."""

    trivial_dim: int = 0
    rotation_counts: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        if self.trivial_dim < 0:
            raise DomainError("trivial_dim must be >= 0")
        counts = dict(self.rotation_counts)
        if any(v < 0 for v in counts.values()):
            raise DomainError("rotation multiplicities must be >= 0")
        object.__setattr__(self, "rotation_counts", _prune(counts))

    @property
    def dimension(self) -> int:
        return self.trivial_dim + 2 * sum(v for _, v in self.rotation_counts)

    def __add__(self, other: "So2RepDecomposition") -> "So2RepDecomposition":
        merged = dict(self.rotation_counts)
        for k, v in other.rotation_counts:
            merged[k] = merged.get(k, 0) + v
        return So2RepDecomposition(self.trivial_dim + other.trivial_dim, tuple(merged.items()))


def chi_sphere(rep: So2RepDecomposition) -> EulerElement:
    """Equivariant Euler characteristic of the one-point compactification S^V."""
    sign = -1 if rep.trivial_dim % 2 else 1
    return EulerElement(sign, tuple((k, -sign * d) for k, d in rep.rotation_counts))


def rep_of_negative_space(spec: MatrixSpectrum, eigs: EigenvalueList, lam: float) -> So2RepDecomposition:
    """SO(2)-representation on the negative eigenspace of Id - L_{lambda A} normal to the orbit."""
    if eigs.N != 2:
        raise DomainError("U(SO(2)) computations need N = 2")
    check_cutoff(spec, eigs, [lam])
    trivial = 0
    rotations: dict[int, int] = {}
    for space in eigs.distinct():
        for e in spec.eigenvalues:
            gamma = lam * e.alpha
            if not (space.beta < gamma) or _intersects(gamma, space.beta):
                continue
            for degree, _ in space.blocks:
                if degree == 0:
                    trivial += e.multiplicity
                else:
                    rotations[degree] = rotations.get(degree, 0) + e.multiplicity
    return So2RepDecomposition(trivial, tuple(rotations.items()))


def index_change_witness(candidate, spec: MatrixSpectrum, eigs: EigenvalueList,
                         eps: Optional[float] = None) -> bool:
    """Whether the Euler characteristics of the Conley indices differ across ``candidate``."""
    from .bifurcation_classifier import separation_epsilon

    lam0 = candidate.lambda0 if hasattr(candidate, "lambda0") else float(candidate)
    if eps is None:
        eps = separation_epsilon(lam0, spec, eigs)
    below = chi_sphere(rep_of_negative_space(spec, eigs, lam0 - eps))
    above = chi_sphere(rep_of_negative_space(spec, eigs, lam0 + eps))
    return below != above
