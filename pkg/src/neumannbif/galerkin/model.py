"""Polynomial potentials F: R^m -> R with a critical orbit at u0.

Two families are supported:

* ``radial``: m = 2, F(u) = f(|u|^2) with a polynomial f and f'(r0) = 0,
  invariant under SO(2) rotating the target plane; u0 = (sqrt(r0), 0).
* ``quadratic``: F(u) = 1/2 (A w, w) + g(w), w = u - u0, with g a sum of
  monomials of total degree >= 3 and a trivial symmetry group.

Every array method works on a batch of states ``U`` of shape (m, Q).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from ..bifurcation_classifier import nondegenerate_orbit_check
from ..errors import DomainError

CRITICAL_TOL = 1e-12
HESSIAN_TOL = 1e-10


@dataclass(frozen=True)
class Monomial:
    coefficient: float
    powers: tuple[int, ...]

    @property
    def degree(self) -> int:
        return sum(self.powers)


@dataclass
class ModelPotential:
    kind: str
    m: int
    u0: np.ndarray
    f_coefficients: Optional[np.ndarray] = None
    r0: Optional[float] = None
    matrix_A: Optional[np.ndarray] = None
    remainder: tuple[Monomial, ...] = ()
    generators: tuple[np.ndarray, ...] = field(default=())

    # construction ----------------------------------------------------------

    @classmethod
    def radial(cls, f_coefficients: Sequence[float], r0: float) -> "ModelPotential":
        """F(u) = f(|u|^2) on R^2 with f given by ascending coefficients."""
        coeffs = np.asarray(f_coefficients, dtype=float)
        if coeffs.ndim != 1 or coeffs.size < 3:
            raise DomainError("f needs at least a quadratic term")
        if not r0 > 0:
            raise DomainError("r0 must be positive so that the orbit is a circle")
        u0 = np.array([np.sqrt(r0), 0.0])
        rot = np.array([[0.0, -1.0], [1.0, 0.0]])
        model = cls("radial", 2, u0, f_coefficients=coeffs, r0=float(r0), generators=(rot,))
        model._validate()
        return model

    @classmethod
    def quadratic(cls, A, u0=None, remainder: Sequence = ()) -> "ModelPotential":
        """F(u) = 1/2 (A(u-u0), u-u0) + g(u-u0) with polynomial g of degree >= 3."""
        A = np.atleast_2d(np.asarray(A, dtype=float))
        m = A.shape[0]
        u0 = np.zeros(m) if u0 is None else np.asarray(u0, dtype=float)
        terms = []
        for t in remainder:
            mono = t if isinstance(t, Monomial) else Monomial(float(t[0]), tuple(int(p) for p in t[1]))
            if len(mono.powers) != m or mono.degree < 3 or min(mono.powers) < 0:
                raise DomainError(f"remainder monomial {mono} must have {m} exponents and degree >= 3")
            terms.append(mono)
        model = cls("quadratic", m, u0, matrix_A=0.5 * (A + A.T), remainder=tuple(terms))
        model._validate()
        return model

    def _validate(self) -> None:
        g0 = self.grad(self.u0[:, None])[:, 0]
        if np.abs(g0).max() > CRITICAL_TOL:
            raise DomainError(f"u0 is not a critical point: |grad F(u0)| = {np.abs(g0).max():.3e}")
        h0 = self.hessian_at_u0()
        if self.kind == "radial":
            expected = 4.0 * self._fpoly(self.r0, 2) * np.outer(self.u0, self.u0)
            if np.abs(h0 - expected).max() > HESSIAN_TOL:
                raise DomainError("Hessian at u0 does not match 4 f''(r0) u0 u0^T")
        if not nondegenerate_orbit_check(h0, self.orbit_dim):
            raise DomainError("the critical orbit of u0 is degenerate")

    # polynomial data -------------------------------------------------------

    def _fpoly(self, s, order: int):
        c = self.f_coefficients
        for _ in range(order):
            c = P.polyder(c)
        return P.polyval(s, c)

    @property
    def orbit_dim(self) -> int:
        return len(self.generators)

    @property
    def degree(self) -> int:
        """Polynomial degree of F in u."""
        if self.kind == "radial":
            return 2 * (len(np.trim_zeros(self.f_coefficients, "b")) - 1)
        return max([2] + [t.degree for t in self.remainder])

    # evaluation ------------------------------------------------------------

    def value(self, U: np.ndarray) -> np.ndarray:
        if self.kind == "radial":
            return self._fpoly(np.sum(U * U, axis=0), 0)
        W = U - self.u0[:, None]
        out = 0.5 * np.einsum("iq,ij,jq->q", W, self.matrix_A, W)
        for t in self.remainder:
            out = out + t.coefficient * np.prod(W ** np.array(t.powers)[:, None], axis=0)
        return out

    def grad(self, U: np.ndarray) -> np.ndarray:
        if self.kind == "radial":
            s = np.sum(U * U, axis=0)
            return 2.0 * self._fpoly(s, 1) * U
        W = U - self.u0[:, None]
        out = self.matrix_A @ W
        for t in self.remainder:
            for i, p in enumerate(t.powers):
                if p == 0:
                    continue
                powers = np.array(t.powers)
                powers[i] -= 1
                out[i] += t.coefficient * p * np.prod(W ** powers[:, None], axis=0)
        return out

    def hess(self, U: np.ndarray) -> np.ndarray:
        """Second derivatives, shape (m, m, Q)."""
        q = U.shape[1]
        if self.kind == "radial":
            s = np.sum(U * U, axis=0)
            d1 = self._fpoly(s, 1)
            d2 = self._fpoly(s, 2)
            out = 4.0 * d2[None, None, :] * U[:, None, :] * U[None, :, :]
            for i in range(self.m):
                out[i, i] += 2.0 * d1
            return out
        W = U - self.u0[:, None]
        out = np.repeat(self.matrix_A[:, :, None], q, axis=2).astype(float)
        for t in self.remainder:
            for i in range(self.m):
                for j in range(self.m):
                    powers = np.array(t.powers)
                    factor = powers[i]
                    powers[i] -= 1
                    if factor == 0:
                        continue
                    factor *= powers[j]
                    powers[j] -= 1
                    if factor == 0:
                        continue
                    out[i, j] += t.coefficient * factor * np.prod(W ** powers[:, None], axis=0)
        return out

    def hessian_at_u0(self) -> np.ndarray:
        return self.hess(self.u0[:, None])[:, :, 0]

    # symmetry --------------------------------------------------------------

    def orbit_point_near(self, constant_part: np.ndarray) -> np.ndarray:
        """Point of the orbit of u0 closest to the vector ``constant_part``."""
        if self.kind == "radial":
            norm = np.linalg.norm(constant_part)
            if norm == 0.0:
                return self.u0.copy()
            return np.linalg.norm(self.u0) * constant_part / norm
        return self.u0.copy()

    def describe(self) -> dict:
        if self.kind == "radial":
            return {"kind": "radial", "f_coefficients": self.f_coefficients.tolist(), "r0": self.r0}
        return {"kind": "quadratic", "A": self.matrix_A.tolist(), "u0": self.u0.tolist(),
                "remainder": [{"coefficient": t.coefficient, "powers": list(t.powers)} for t in self.remainder]}
