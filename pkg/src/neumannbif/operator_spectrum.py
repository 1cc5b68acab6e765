"""Spectra of the coupling matrix A and of Id - L_{lambda A} on H^1(B^N)^m.

With alpha_j the eigenvalues of A and beta_k those of the Neumann Laplacian,
the operator Id - L_{lambda A} is diagonal on the products of eigenvectors,
with eigenvalue (beta_k - lambda alpha_j) / (1 + beta_k) and multiplicity
mu_A(alpha_j) * dim V(beta_k).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import AsymmetryError, ConvergenceError, DomainError, InsufficientCutoffError
from .neumann_spectrum import EigenspaceDecomposition, EigenvalueList

SYMMETRY_TOL = 1e-12
OFFDIAG_TOL = 1e-13
MAX_SWEEPS = 100
INTERSECTION_TOL = 1e-8


@dataclass(frozen=True)
class MatrixEigenvalue:
    alpha: float
    multiplicity: int
    eigenvectors: np.ndarray  # columns, shape (m, multiplicity)


@dataclass(frozen=True)
class MatrixSpectrum:
    """Distinct eigenvalues of a symmetric matrix with multiplicities and eigenvectors."""

    size_m: int
    eigenvalues: tuple[MatrixEigenvalue, ...]
    merge_tol: float

    @property
    def alphas(self) -> list[float]:
        return [e.alpha for e in self.eigenvalues]

    @property
    def kernel_dim(self) -> int:
        return sum(e.multiplicity for e in self.eigenvalues if e.alpha == 0.0)

    def multiplicity(self, alpha: float) -> int:
        for e in self.eigenvalues:
            if abs(e.alpha - alpha) <= self.merge_tol:
                return e.multiplicity
        return 0

    @property
    def positive_count(self) -> int:
        return sum(e.multiplicity for e in self.eigenvalues if e.alpha > 0)

    @property
    def negative_count(self) -> int:
        return sum(e.multiplicity for e in self.eigenvalues if e.alpha < 0)

    def reconstruct(self) -> np.ndarray:
        out = np.zeros((self.size_m, self.size_m))
        for e in self.eigenvalues:
            out += e.alpha * e.eigenvectors @ e.eigenvectors.T
        return out

    def scaled(self, c: float) -> "MatrixSpectrum":
        """Spectrum of c * A for c > 0."""
        if not c > 0:
            raise DomainError("scale must be positive")
        return MatrixSpectrum(self.size_m,
                              tuple(MatrixEigenvalue(c * e.alpha, e.multiplicity, e.eigenvectors)
                                    for e in self.eigenvalues),
                              c * self.merge_tol)


@dataclass(frozen=True)
class OperatorEigenvalue:
    beta: float
    alpha: float
    lam: float
    multiplicity: int

    @property
    def value(self) -> float:
        return (self.beta - self.lam * self.alpha) / (1.0 + self.beta)


@dataclass(frozen=True)
class KernelEntry:
    """One element gamma of sigma(lambda A) intersected with the Laplacian spectrum."""

    gamma: float  # common value lambda * alpha = beta
    alpha: float
    mu: int
    decomposition: EigenspaceDecomposition

    @property
    def dim(self) -> int:
        return self.mu * self.decomposition.total_dim


def jacobi_eigh(a: np.ndarray, tol: float = OFFDIAG_TOL, max_sweeps: int = MAX_SWEEPS):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Returns ``(eigenvalues, eigenvectors)`` sorted ascending, eigenvectors as columns.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = max(1.0, np.abs(a).max(initial=0.0))
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise ConvergenceError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def matrix_spectrum(a, merge_tol: Optional[float] = None) -> MatrixSpectrum:
    """Distinct eigenvalues of symmetric ``a`` with multiplicities.

    Eigenvalues closer than ``merge_tol`` (default ``1e-9 * (1 + ||A||)``) are
    merged; values within ``merge_tol`` of 0 are snapped to exactly 0.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    m = a.shape[0]
    if a.shape != (m, m) or m < 1 or m > 64:
        raise DomainError(f"need a square matrix of size 1..64, got {a.shape}")
    if np.abs(a - a.T).max() > SYMMETRY_TOL:
        raise AsymmetryError(f"matrix is not symmetric (defect {np.abs(a - a.T).max():.3e})")
    if merge_tol is None:
        merge_tol = 1e-9 * (1.0 + np.abs(a).max())
    w, v = jacobi_eigh(0.5 * (a + a.T))
    groups: list[list[int]] = []
    for i, value in enumerate(w):
        if groups and abs(value - w[groups[-1][0]]) <= merge_tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    eigs = []
    for g in groups:
        alpha = float(np.mean(w[g]))
        if abs(alpha) <= merge_tol:
            alpha = 0.0
        eigs.append(MatrixEigenvalue(alpha, len(g), v[:, g]))
    return MatrixSpectrum(m, tuple(eigs), float(merge_tol))


def _intersects(gamma: float, beta: float, tol: float = INTERSECTION_TOL) -> bool:
    return abs(gamma - beta) <= tol * (1.0 + abs(beta))


def required_beta_max(spec: MatrixSpectrum, lambdas: Sequence[float]) -> float:
    return max([0.0] + [lam * a for lam in lambdas for a in spec.alphas])


def check_cutoff(spec: MatrixSpectrum, eigs: EigenvalueList, lambdas: Sequence[float]) -> None:
    need = required_beta_max(spec, lambdas)
    if eigs.beta_max < need:
        raise InsufficientCutoffError(
            f"Laplacian spectrum enumerated up to {eigs.beta_max}, need at least {need}")


def spectrum_id_minus_L(spec: MatrixSpectrum, eigs: EigenvalueList, lam: float) -> list[OperatorEigenvalue]:
    """All eigenvalues of Id - L_{lambda A} with beta up to the enumeration cutoff."""
    check_cutoff(spec, eigs, [lam])
    out = []
    for space in eigs.distinct():
        for e in spec.eigenvalues:
            out.append(OperatorEigenvalue(space.beta, e.alpha, lam, e.multiplicity * space.total_dim))
    return out


def kernel_description(spec: MatrixSpectrum, eigs: EigenvalueList, lam: float) -> list[KernelEntry]:
    """Decomposition of ker(Id - L_{lambda A}) by the values shared by lambda A and -Laplace."""
    check_cutoff(spec, eigs, [lam])
    spaces = eigs.distinct()
    entries = []
    if lam == 0.0:
        # sigma(0 * A) = {0} with multiplicity m
        return [KernelEntry(0.0, 0.0, spec.size_m, spaces[0])]
    for e in spec.eigenvalues:
        gamma = lam * e.alpha
        for space in spaces:
            if _intersects(gamma, space.beta):
                entries.append(KernelEntry(space.beta, e.alpha, e.multiplicity, space))
                break
    entries.sort(key=lambda k: k.gamma)
    return entries


def kernel_dim(spec: MatrixSpectrum, eigs: EigenvalueList, lam: float) -> int:
    return sum(k.dim for k in kernel_description(spec, eigs, lam))


def morse_index(spec: MatrixSpectrum, eigs: EigenvalueList, lam: float) -> int:
    """Total multiplicity of negative eigenvalues of Id - L_{lambda A}."""
    check_cutoff(spec, eigs, [lam])
    count = 0
    for space in eigs.distinct():
        for e in spec.eigenvalues:
            gamma = lam * e.alpha
            if space.beta < gamma and not _intersects(gamma, space.beta):
                count += e.multiplicity * space.total_dim
    return count
