"""Galerkin discretization of the functional, Newton solves and branch tracing.

With coefficients c in the H^1-orthonormal eigenbasis, the functional is

    Phi(c, lam) = 1/2 sum_b beta_b/(1+beta_b) c_b^2 - lam * int F(u),

so its gradient is D c - lam * N(c) with N_b = int grad F(u) . e_b and the
Hessian is diag(D) - lam * K(c), K_ab = int e_a . Hess F(u) e_b.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import BranchSwitchError, ConvergenceError, DomainError, SingularSystemError
from .basis import DiskBasis
from .model import ModelPotential

log = logging.getLogger(__name__)

NEWTON_TOL = 1e-11
NEWTON_MAX_ITER = 25
ACCEPT_TOL = 1e-10
ZERO_SINGULAR = 1e-7
BISECT_WIDTH = 1e-8
RADIAL_THRESHOLD = 0.999
ACTIVE_DEGREE_TOL = 1e-8
TANGENT_TOL = 1e-10


# ---------------------------------------------------------------------------
# discretized functional


def _check(model: ModelPotential, basis: DiskBasis) -> None:
    if model.m != basis.m_components:
        raise DomainError(f"model has m={model.m}, basis has {basis.m_components} components")
    basis.check_degree(model.degree)


def functional_value(model: ModelPotential, basis: DiskBasis, coeffs, lam: float) -> float:
    _check(model, basis)
    c = np.asarray(coeffs, dtype=float)
    U = basis.evaluate(c)
    return float(0.5 * np.dot(basis.linear_diag * c, c) - lam * np.dot(basis.weights, model.value(U)))


def nonlinear_term(model: ModelPotential, basis: DiskBasis, coeffs) -> np.ndarray:
    U = basis.evaluate(coeffs)
    return (model.grad(U) @ basis.weighted_values.T).ravel()


def eval_gradient(model: ModelPotential, basis: DiskBasis, coeffs, lam: float) -> np.ndarray:
    _check(model, basis)
    c = np.asarray(coeffs, dtype=float)
    return basis.linear_diag * c - lam * nonlinear_term(model, basis, c)


def nonlinear_hessian(model: ModelPotential, basis: DiskBasis, coeffs) -> np.ndarray:
    U = basis.evaluate(coeffs)
    H = model.hess(U)
    m, ns = basis.m_components, basis.n_scalar
    K = np.empty((basis.size, basis.size))
    for i in range(m):
        for j in range(i, m):
            block = (basis.weighted_values * H[i, j][None, :]) @ basis.values.T
            block = 0.5 * (block + block.T)
            K[i * ns:(i + 1) * ns, j * ns:(j + 1) * ns] = block
            K[j * ns:(j + 1) * ns, i * ns:(i + 1) * ns] = block.T
    return K


def eval_hessian(model: ModelPotential, basis: DiskBasis, coeffs, lam: float) -> np.ndarray:
    _check(model, basis)
    return np.diag(basis.linear_diag) - lam * nonlinear_hessian(model, basis, coeffs)


# ---------------------------------------------------------------------------
# group tangents and isotropy


def group_tangents(model: ModelPotential, basis: DiskBasis, coeffs) -> np.ndarray:
    """Orthonormal basis (columns) of the tangent space of the group orbit through ``coeffs``.

    Uses the target-space generators of the model and spatial rotation;
    vanishing or dependent directions are dropped.
    """
    raw = [basis.target_action(coeffs, g) for g in model.generators]
    raw.append(basis.rotation_tangent(coeffs))
    scale = max(1.0, float(np.linalg.norm(coeffs)))
    cols = [v for v in raw if np.linalg.norm(v) > TANGENT_TOL * scale]
    if not cols:
        return np.zeros((basis.size, 0))
    q, r = np.linalg.qr(np.column_stack(cols))
    keep = np.abs(np.diag(r)) > TANGENT_TOL * scale
    return q[:, keep]


@dataclass(frozen=True)
class IsotropySignature:
    radial_energy_fraction: float
    dominant_degree: int
    estimated_spatial_isotropy: str


def isotropy_signature(basis: DiskBasis, coeffs) -> IsotropySignature:
    """Angular-mode content of a coefficient vector, measured in the H^1 norm."""
    c = basis.as_matrix(coeffs)
    per_mode = np.sum(c * c, axis=0)
    energy = np.bincount(basis.degrees, weights=per_mode, minlength=basis.l_max + 1)
    total = float(energy.sum())
    if total == 0.0:
        return IsotropySignature(1.0, 0, "SO(2)")
    fraction = float(energy[0] / total)
    dominant = int(np.argmax(energy))
    if fraction > RADIAL_THRESHOLD:
        return IsotropySignature(fraction, dominant, "SO(2)")
    active = [l for l in range(1, len(energy)) if energy[l] > ACTIVE_DEGREE_TOL * total]
    order = 0
    for l in active:
        order = math.gcd(order, l)
    return IsotropySignature(fraction, dominant, f"Z_{order}")


def orbit_deviation(model: ModelPotential, basis: DiskBasis, coeffs) -> np.ndarray:
    """``coeffs`` minus the nearest point of the trivial orbit."""
    anchor = model.orbit_point_near(basis.constant_part(coeffs))
    return np.asarray(coeffs, dtype=float) - basis.constant_state(anchor)


# ---------------------------------------------------------------------------
# Newton


@dataclass
class NewtonResult:
    coeffs: np.ndarray
    lam: float
    iterations: int
    residual: float


def _solve(J: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        step = np.linalg.solve(J, rhs)
    except np.linalg.LinAlgError:
        step = None
    if step is None or not np.all(np.isfinite(step)):
        s = np.linalg.svd(J, compute_uv=False)
        raise SingularSystemError("singular bordered system", singular_values=s[-4:][::-1].tolist())
    return step


def newton_correct(model: ModelPotential, basis: DiskBasis, coeffs, lam: float,
                   phase=None, max_iter: int = NEWTON_MAX_ITER, tol: float = NEWTON_TOL) -> NewtonResult:
    """Solve grad Phi(., lam) = 0 starting from ``coeffs``.

    ``phase`` is a vector or a matrix of column vectors; each adds the
    constraint <c - coeffs, phase> = 0 with a Lagrange multiplier.  Without
    a phase the step is the least-squares solution, which leaves orbit
    directions untouched.
    """
    c0 = np.array(coeffs, dtype=float)
    c = c0.copy()
    T = None if phase is None else np.asarray(phase, dtype=float).reshape(basis.size, -1)
    k = 0 if T is None else T.shape[1]
    mu = np.zeros(k)
    for it in range(max_iter + 1):
        g = eval_gradient(model, basis, c, lam)
        res = float(np.linalg.norm(g))
        if res <= tol:
            return NewtonResult(c, lam, it, res)
        if it == max_iter:
            break
        H = eval_hessian(model, basis, c, lam)
        if T is None:
            step, *_ = np.linalg.lstsq(H, -g, rcond=1e-13)
            c = c + step
            continue
        J = np.block([[H, T], [T.T, np.zeros((k, k))]])
        rhs = -np.concatenate([g + T @ mu, T.T @ (c - c0)])
        step = _solve(J, rhs)
        c = c + step[:basis.size]
        mu = mu + step[basis.size:]
    raise ConvergenceError(f"Newton did not converge in {max_iter} iterations (residual {res:.3e})")


# ---------------------------------------------------------------------------
# branches


@dataclass
class BranchPoint:
    lam: float
    coeffs: np.ndarray
    residual_norm: float
    jacobian_min_singulars: tuple[float, ...]
    isotropy: IsotropySignature
    coeff_norm: float


@dataclass
class Branch:
    kind: str  # "trivial" or "bifurcating"
    points: list[BranchPoint] = field(default_factory=list)
    origin: Optional[tuple[float, int]] = None


@dataclass(frozen=True)
class StepPolicy:
    trivial_step: float = 0.05
    ds_initial: float = 0.02
    ds_min: float = 1e-5
    ds_max: float = 0.1
    grow: float = 1.3
    grow_after: int = 3
    branch_points: int = 12
    max_attempts: int = 80


def normal_singulars(H: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Ascending singular values of H restricted to the complement of range(T)."""
    if T.shape[1]:
        q, _ = np.linalg.qr(np.column_stack([T, np.eye(H.shape[0])]))
        Q = q[:, T.shape[1]:]
        Hn = Q.T @ H @ Q
    else:
        Hn = H
    return np.sort(np.abs(np.linalg.eigvalsh(0.5 * (Hn + Hn.T))))


def _make_point(model, basis, c, lam, H, T) -> BranchPoint:
    g = eval_gradient(model, basis, c, lam)
    sing = normal_singulars(H, T)
    dev = orbit_deviation(model, basis, c)
    return BranchPoint(float(lam), c.copy(), float(np.linalg.norm(g)), tuple(float(s) for s in sing[:4]),
                       isotropy_signature(basis, dev), float(np.linalg.norm(dev)))


class _TrivialLinearization:
    """Normal-space Hessian on the trivial solution, affine in lambda."""

    def __init__(self, model: ModelPotential, basis: DiskBasis):
        self.c0 = basis.constant_state(model.u0)
        self.T = group_tangents(model, basis, self.c0)
        K = nonlinear_hessian(model, basis, self.c0)
        if self.T.shape[1]:
            q, _ = np.linalg.qr(np.column_stack([self.T, np.eye(basis.size)]))
            Q = q[:, self.T.shape[1]:]
        else:
            Q = np.eye(basis.size)
        self.Q = Q
        self.D = Q.T @ np.diag(basis.linear_diag) @ Q
        self.K = Q.T @ K @ Q
        self.K = 0.5 * (self.K + self.K.T)
        self.D = 0.5 * (self.D + self.D.T)

    def eigh(self, lam: float):
        return np.linalg.eigh(self.D - lam * self.K)

    def eigvals(self, lam: float) -> np.ndarray:
        return np.linalg.eigvalsh(self.D - lam * self.K)

    def morse(self, lam: float) -> int:
        return int(np.sum(self.eigvals(lam) < 0.0))

    def near_zero(self, lam: float) -> int:
        return int(np.sum(np.abs(self.eigvals(lam)) < ZERO_SINGULAR))


def _refine(lin: _TrivialLinearization, lo: float, hi: float, m_lo: int, m_hi: int, out: list) -> None:
    """Bisect on the Morse index until each index jump is bracketed to BISECT_WIDTH."""
    if hi - lo <= BISECT_WIDTH:
        out.append(0.5 * (lo + hi))
        return
    mid = 0.5 * (lo + hi)
    m_mid = lin.morse(mid)
    if m_mid != m_lo:
        _refine(lin, lo, mid, m_lo, m_mid, out)
    if m_mid != m_hi:
        _refine(lin, mid, hi, m_mid, m_hi, out)


def continue_trivial_and_detect(model: ModelPotential, basis: DiskBasis, lambda_range: Sequence[float],
                                step_policy: StepPolicy = StepPolicy()) -> tuple[Branch, list[float]]:
    """Walk the trivial solution over ``lambda_range`` and locate Hessian degeneracies.

    The range is open.  A level is reported where the Morse index on the
    orbit-normal space jumps, after bisection to width 1e-8 and confirmation
    that some normal singular value is below 1e-7 there, or at an interior
    grid point where such a singular value occurs.
    """
    _check(model, basis)
    lo, hi = float(lambda_range[0]), float(lambda_range[1])
    if not lo < hi:
        raise DomainError(f"empty lambda range [{lo}, {hi}]")
    if not step_policy.trivial_step > 0:
        raise DomainError("trivial step must be positive")
    lin = _TrivialLinearization(model, basis)
    n_steps = max(1, math.ceil((hi - lo) / step_policy.trivial_step))
    grid = [lo + (hi - lo) * i / n_steps for i in range(n_steps + 1)]
    if lo < 0.0 < hi:
        # at 0 the crossing need not change the index, so sample it exactly
        grid = sorted(set(grid) | {0.0})
    branch = Branch("trivial")
    detected: list[float] = []
    morse = [lin.morse(lam) for lam in grid]
    for lam, mi in zip(grid, morse):
        g = eval_gradient(model, basis, lin.c0, lam)
        sing = np.sort(np.abs(lin.eigvals(lam)))
        branch.points.append(BranchPoint(lam, lin.c0.copy(), float(np.linalg.norm(g)),
                                         tuple(float(s) for s in sing[:4]),
                                         IsotropySignature(1.0, 0, "SO(2)"), 0.0))
    singular = [lin.near_zero(lam) > 0 for lam in grid]
    for i in range(1, len(grid) - 1):
        if singular[i]:
            detected.append(grid[i])
    for i in range(len(grid) - 1):
        a, b = grid[i], grid[i + 1]
        # a singular endpoint is already reported; compare just inside it
        m_a = lin.morse(a + BISECT_WIDTH) if singular[i] else morse[i]
        m_b = lin.morse(b - BISECT_WIDTH) if singular[i + 1] else morse[i + 1]
        if m_a != m_b:
            found: list[float] = []
            _refine(lin, a, b, m_a, m_b, found)
            for lam in found:
                if np.min(np.abs(lin.eigvals(lam))) < ZERO_SINGULAR:
                    detected.append(lam)
                else:
                    log.warning("index jump near %s without a small singular value", lam)
    return branch, sorted(detected)


def kernel_directions(model: ModelPotential, basis: DiskBasis, lam: float) -> np.ndarray:
    """Unit vectors (columns) spanning the near-kernel of the normal Hessian on the trivial solution."""
    lin = _TrivialLinearization(model, basis)
    w, v = lin.eigh(lam)
    idx = [i for i in np.argsort(np.abs(w)) if abs(w[i]) < ZERO_SINGULAR]
    return lin.Q @ v[:, idx]


def _corrector(model, basis, c, lam, anchor, T, constraint, max_iter=NEWTON_MAX_ITER):
    """Newton on grad Phi + T mu = 0, T^T (c - anchor) = 0 and one scalar constraint.

    ``constraint(c, lam)`` returns (value, row_c, row_lam) with the value to
    drive to zero and its derivatives.
    """
    n, k = basis.size, T.shape[1]
    mu = np.zeros(k)
    c = c.copy()
    for _ in range(max_iter + 1):
        g = eval_gradient(model, basis, c, lam)
        value, row_c, row_lam = constraint(c, lam)
        phase = T.T @ (c - anchor)
        if np.linalg.norm(g) <= NEWTON_TOL and abs(value) <= NEWTON_TOL and np.linalg.norm(phase) <= NEWTON_TOL:
            return c, lam
        J = np.zeros((n + 1 + k, n + 1 + k))
        J[:n, :n] = eval_hessian(model, basis, c, lam)
        J[:n, n] = -nonlinear_term(model, basis, c)
        J[:n, n + 1:] = T
        J[n, :n] = row_c
        J[n, n] = row_lam
        J[n + 1:, :n] = T.T
        rhs = -np.concatenate([g + T @ mu, [value], phase])
        step = _solve(J, rhs)
        c, lam, mu = c + step[:n], lam + step[n], mu + step[n + 1:]
        if not (np.all(np.isfinite(c)) and math.isfinite(lam)):
            break
    raise ConvergenceError("corrector did not converge")


def _trace(model, basis, lambda0, c0, k, amplitude, policy: StepPolicy, origin) -> Branch:
    seed = c0 + amplitude * k
    T = group_tangents(model, basis, seed)

    def pin(c, lam):
        return float(k @ (c - c0)) - amplitude, k, 0.0

    c, lam = _corrector(model, basis, seed, lambda0, seed, T, pin)
    branch = Branch("bifurcating", origin=origin)

    def accept(c, lam):
        H = eval_hessian(model, basis, c, lam)
        point = _make_point(model, basis, c, lam, H, group_tangents(model, basis, c))
        if point.residual_norm > ACCEPT_TOL:
            raise ConvergenceError(f"accepted residual {point.residual_norm:.3e} too large")
        if point.coeff_norm < 0.1 * amplitude:
            raise BranchSwitchError("corrector fell back onto the trivial orbit")
        branch.points.append(point)

    accept(c, lam)
    prev = np.concatenate([c0, [lambda0]])
    y = np.concatenate([c, [lam]])
    t = (y - prev) / np.linalg.norm(y - prev)
    ds = policy.ds_initial
    streak = 0
    attempts = 0
    while len(branch.points) < policy.branch_points and attempts < policy.max_attempts:
        attempts += 1
        pred = y + ds * t
        T = group_tangents(model, basis, pred[:-1])
        y_k, t_k, ds_k = y, t, ds

        def arclength(c, lam):
            return float(t_k[:-1] @ (c - y_k[:-1]) + t_k[-1] * (lam - y_k[-1])) - ds_k, t_k[:-1], float(t_k[-1])

        try:
            c, lam = _corrector(model, basis, pred[:-1], float(pred[-1]), pred[:-1], T, arclength)
            accept(c, lam)
        except (ConvergenceError, SingularSystemError) as exc:
            log.debug("continuation step %.3e failed: %s", ds, exc)
            ds *= 0.5
            streak = 0
            if ds < policy.ds_min:
                break
            continue
        y_new = np.concatenate([c, [lam]])
        t = (y_new - y) / np.linalg.norm(y_new - y)
        y = y_new
        streak += 1
        if streak >= policy.grow_after:
            ds = min(ds * policy.grow, policy.ds_max)
            streak = 0
    if len(branch.points) < 10:
        raise BranchSwitchError(f"only {len(branch.points)} branch points accepted")
    return branch


def switch_branch(model: ModelPotential, basis: DiskBasis, lambda0: float, kernel_direction,
                  amplitude_grid: Sequence[float] = (1e-3, 3e-3, 1e-2),
                  step_policy: StepPolicy = StepPolicy(), kernel_index: int = 0) -> Branch:
    """Leave the trivial solution at ``lambda0`` along ``kernel_direction`` and trace the new branch."""
    _check(model, basis)
    c0 = basis.constant_state(model.u0)
    k = np.asarray(kernel_direction, dtype=float)
    norm = np.linalg.norm(k)
    if norm == 0.0:
        raise DomainError("kernel direction must be nonzero")
    k = k / norm
    amplitudes = [float(a) for a in amplitude_grid if a != 0.0]
    if not amplitudes:
        H = eval_hessian(model, basis, c0, lambda0)
        return Branch("trivial", [_make_point(model, basis, c0, lambda0, H, group_tangents(model, basis, c0))])
    failures = []
    for a in amplitudes:
        try:
            return _trace(model, basis, lambda0, c0, k, a, step_policy, (float(lambda0), kernel_index))
        except (ConvergenceError, SingularSystemError, BranchSwitchError) as exc:
            failures.append(f"a={a}: {exc}")
    raise BranchSwitchError("all seeds failed: " + "; ".join(failures))
