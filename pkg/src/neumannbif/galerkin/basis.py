"""Eigenfunction basis of the Neumann Laplacian on the unit disk, H^1-normalized.

Scalar modes are ordered by degree: for l = 0 the constant followed by
J_0(x_{0m} r), m = 1..m_max; for each l >= 1 and m = 1..m_max the pair
J_l(x_{lm} r) cos(l phi), J_l(x_{lm} r) sin(l phi).  Vector-valued
coefficients are stored component-major: index ``i * n_scalar + a``.

The H^1 inner product is <v, w> = int grad v . grad w + v w, so a Laplacian
eigenfunction with eigenvalue beta has squared H^1 norm (1 + beta) times its
squared L^2 norm, and that L^2 norm has a closed form.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..neumann_spectrum import neumann_roots
from ..special_functions import BesselOrder, bessel_j

MAX_DEGREE = 12
MAX_RADIAL = 12
MAX_COMPONENTS = 4


@dataclass(frozen=True)
class ScalarMode:
    degree: int
    radial_index: int  # 0 only for the constant
    parity: str  # "const", "cos" or "sin"
    root: float
    norm: float  # multiply the raw mode by this to get unit H^1 norm

    @property
    def beta(self) -> float:
        return self.root * self.root


@dataclass(frozen=True)
class BasisEntry:
    component: int
    mode: ScalarMode


class DiskBasis:
    """Tensor basis together with its quadrature grid."""

    def __init__(self, l_max: int, m_max: int, m_components: int, nonlinear_degree: int = 4,
                 n_r: int | None = None, n_phi: int | None = None):
        if not (0 <= l_max <= MAX_DEGREE and 1 <= m_max <= MAX_RADIAL and 1 <= m_components <= MAX_COMPONENTS):
            raise DomainError(f"basis size out of range: l_max={l_max}, m_max={m_max}, m={m_components}")
        self.l_max, self.m_max, self.m_components = l_max, m_max, m_components
        self.modes = self._modes()
        self.n_scalar = len(self.modes)
        self.size = self.n_scalar * m_components
        self.entries = [BasisEntry(i, mode) for i in range(m_components) for mode in self.modes]
        self.betas = np.array([mode.beta for mode in self.modes])
        self.linear_diag = np.tile(self.betas / (1.0 + self.betas), m_components)
        self.degrees = np.array([mode.degree for mode in self.modes])
        self.nonlinear_degree = max(2, int(nonlinear_degree))
        x_max = max(mode.root for mode in self.modes)
        self.n_r = n_r or max(2 * m_max + 8, math.ceil(0.5 * self.nonlinear_degree * x_max) + 24)
        self.n_phi = n_phi or max(4 * l_max + 8, self.nonlinear_degree * l_max + 2)
        self._build_grid()

    def _modes(self) -> list[ScalarMode]:
        modes = [ScalarMode(0, 0, "const", 0.0, 1.0 / math.sqrt(math.pi))]
        for l in range(self.l_max + 1):
            for m, x in enumerate(neumann_roots(2, l, self.m_max), start=1):
                j = bessel_j(BesselOrder.for_ball(2, l), x)
                # int_0^1 J_l(x r)^2 r dr = (1 - l^2/x^2) J_l(x)^2 / 2 at a Neumann root
                radial = 0.5 * (1.0 - l * l / (x * x)) * j * j
                l2 = (2.0 if l == 0 else 1.0) * math.pi * radial
                norm = 1.0 / math.sqrt((1.0 + x * x) * l2)
                if l == 0:
                    modes.append(ScalarMode(0, m, "const", x, norm))
                else:
                    modes.append(ScalarMode(l, m, "cos", x, norm))
                    modes.append(ScalarMode(l, m, "sin", x, norm))
        return modes

    def _build_grid(self) -> None:
        t, w = np.polynomial.legendre.leggauss(self.n_r)
        r = 0.5 * (t + 1.0)
        wr = 0.5 * w * r
        phi = 2.0 * math.pi * np.arange(self.n_phi) / self.n_phi
        wphi = 2.0 * math.pi / self.n_phi
        self.r_nodes, self.phi_nodes = r, phi
        self.weights = (wr[:, None] * wphi * np.ones(self.n_phi)[None, :]).ravel()
        values = np.empty((self.n_scalar, self.n_r * self.n_phi))
        radial_cache: dict[tuple[int, int], np.ndarray] = {}
        for a, mode in enumerate(self.modes):
            key = (mode.degree, mode.radial_index)
            if key not in radial_cache:
                if mode.radial_index == 0:
                    radial_cache[key] = np.ones_like(r)
                else:
                    order = BesselOrder.for_ball(2, mode.degree)
                    radial_cache[key] = np.array([bessel_j(order, mode.root * ri) for ri in r])
            if mode.parity == "sin":
                angular = np.sin(mode.degree * phi)
            else:
                angular = np.cos(mode.degree * phi)
            values[a] = mode.norm * (radial_cache[key][:, None] * angular[None, :]).ravel()
        self.values = values
        self.weighted_values = values * self.weights[None, :]

    # coefficient helpers ---------------------------------------------------

    def as_matrix(self, coeffs: np.ndarray) -> np.ndarray:
        c = np.asarray(coeffs, dtype=float)
        if c.shape != (self.size,):
            raise DomainError(f"expected {self.size} coefficients, got shape {c.shape}")
        return c.reshape(self.m_components, self.n_scalar)

    def evaluate(self, coeffs: np.ndarray) -> np.ndarray:
        """Values of u at the quadrature nodes, shape (m, Q)."""
        return self.as_matrix(coeffs) @ self.values

    def constant_state(self, u: np.ndarray) -> np.ndarray:
        """Coefficients of the constant function u(x) = u."""
        c = np.zeros((self.m_components, self.n_scalar))
        c[:, 0] = np.asarray(u, dtype=float) * math.sqrt(math.pi)
        return c.ravel()

    def constant_part(self, coeffs: np.ndarray) -> np.ndarray:
        return self.as_matrix(coeffs)[:, 0] / math.sqrt(math.pi)

    def rotate(self, coeffs: np.ndarray, theta: float) -> np.ndarray:
        """Coefficients of x -> u(R_{-theta} x), i.e. the profile turned by +theta."""
        c = self.as_matrix(coeffs).copy()
        out = c.copy()
        for a, mode in enumerate(self.modes):
            if mode.parity == "cos":
                b = a + 1
                ct, st = math.cos(mode.degree * theta), math.sin(mode.degree * theta)
                out[:, a] = ct * c[:, a] - st * c[:, b]
                out[:, b] = st * c[:, a] + ct * c[:, b]
        return out.ravel()

    def rotation_tangent(self, coeffs: np.ndarray) -> np.ndarray:
        """Derivative of ``rotate(coeffs, theta)`` at theta = 0."""
        c = self.as_matrix(coeffs)
        out = np.zeros_like(c)
        for a, mode in enumerate(self.modes):
            if mode.parity == "cos":
                out[:, a] = -mode.degree * c[:, a + 1]
                out[:, a + 1] = mode.degree * c[:, a]
        return out.ravel()

    def target_action(self, coeffs: np.ndarray, g: np.ndarray) -> np.ndarray:
        """Coefficients of g u for a linear map g on the target space."""
        return (np.asarray(g) @ self.as_matrix(coeffs)).ravel()

    def gram(self) -> np.ndarray:
        """H^1 Gram matrix of the scalar modes under the quadrature."""
        mass = self.weighted_values @ self.values.T
        return mass * (1.0 + self.betas)[None, :]

    def check_degree(self, degree: int) -> None:
        if degree > self.nonlinear_degree:
            warnings.warn(
                f"nonlinearity of degree {degree} exceeds the quadrature budget {self.nonlinear_degree}",
                RuntimeWarning, stacklevel=3)


def build_basis(l_max: int, m_max: int, m_components: int, nonlinear_degree: int = 4) -> DiskBasis:
    return DiskBasis(l_max, m_max, m_components, nonlinear_degree)
