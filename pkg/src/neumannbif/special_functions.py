"""Bessel functions of the first kind and associated Legendre functions.

Orders are integers or half-integers, stored as twice the order so that
``l + (N - 2) / 2`` is represented exactly for every ball dimension ``N``.

Evaluation uses the ascending power series for small arguments and Miller's
backward recurrence elsewhere.  Integer orders are normalised with
``J_0 + 2 * sum(J_2k) = 1``; half-integer orders go through the spherical
Bessel functions and are normalised against the closed forms of ``j_0`` or
``j_1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError

MAX_TWICE_ORDER = 120
MAX_ARGUMENT = 1000.0
SERIES_LIMIT = 8.0

_RESCALE = 1e250


@dataclass(frozen=True, order=True)
class BesselOrder:
    """Order ``nu = twice_order / 2`` of a Bessel function."""

    twice_order: int

    def __post_init__(self):
        if int(self.twice_order) != self.twice_order or self.twice_order < 0:
            raise DomainError(f"twice_order must be a non-negative integer, got {self.twice_order!r}")

    @classmethod
    def for_ball(cls, N: int, l: int) -> "BesselOrder":
        """Order ``l + (N-2)/2`` of the radial Bessel factor on the ball B^N."""
        if N < 2 or l < 0:
            raise DomainError(f"need N >= 2 and l >= 0, got N={N}, l={l}")
        return cls(2 * l + N - 2)

    @classmethod
    def from_nu(cls, nu: float) -> "BesselOrder":
        twice = 2 * nu
        if abs(twice - round(twice)) > 1e-12:
            raise DomainError(f"order {nu} is neither integer nor half-integer")
        return cls(int(round(twice)))

    @property
    def nu(self) -> float:
        return self.twice_order / 2

    @property
    def is_integer(self) -> bool:
        return self.twice_order % 2 == 0


OrderLike = Union[BesselOrder, int, float]


def _as_order(order: OrderLike) -> BesselOrder:
    if isinstance(order, BesselOrder):
        return order
    return BesselOrder.from_nu(order)


def _check(order: BesselOrder, x: float) -> None:
    if order.twice_order > MAX_TWICE_ORDER:
        raise DomainError(f"order {order.nu} exceeds {MAX_TWICE_ORDER / 2}")
    if not (x >= 0.0):
        raise DomainError(f"argument must be >= 0, got {x}")
    if x > MAX_ARGUMENT:
        raise DomainError(f"argument {x} exceeds {MAX_ARGUMENT}")


def _series(nu: float, x: float) -> float:
    if x == 0.0:
        return 1.0 if nu == 0 else 0.0
    half = 0.5 * x
    # log(x) - log(2) avoids underflow of x/2 for subnormal x
    term = math.exp(nu * (math.log(x) - math.log(2.0)) - math.lgamma(nu + 1.0))
    q = half * half
    total = term
    k = 0
    while True:
        k += 1
        term *= -q / (k * (k + nu))
        total += term
        if abs(term) < 1e-17 * max(abs(total), 1e-300) and k > half:
            return total
        if term == 0.0:
            return total


def _miller_start(n_top: int, x: float) -> int:
    base = max(n_top, x)
    start = int(base + 20 + math.sqrt(40.0 * base))
    return start + (start % 2)


def _miller_integer(n_lo: int, n_hi: int, x: float) -> list[float]:
    """J_n(x) for n_lo <= n <= n_hi by backward recurrence (x > 0)."""
    start = _miller_start(n_hi + 1, x)
    out = [0.0] * (n_hi - n_lo + 1)
    two_over_x = 2.0 / x
    j_next, j_cur = 0.0, 1e-300
    norm = 0.0
    for k in range(start, 0, -1):
        # j_cur holds J_k, j_next holds J_{k+1}
        if k % 2 == 0:
            norm += 2.0 * j_cur
        if n_lo <= k <= n_hi:
            out[k - n_lo] = j_cur
        j_prev = k * two_over_x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if abs(j_cur) > _RESCALE:
            j_cur /= _RESCALE
            j_next /= _RESCALE
            norm /= _RESCALE
            out = [v / _RESCALE for v in out]
    # j_cur is now J_0
    norm += j_cur
    if n_lo == 0:
        out[0] = j_cur
    return [v / norm for v in out]


def _miller_half(n_lo: int, n_hi: int, x: float) -> list[float]:
    """J_{n+1/2}(x) for n_lo <= n <= n_hi via spherical Bessel functions (x > 0)."""
    start = _miller_start(n_hi + 1, x)
    out = [0.0] * (n_hi - n_lo + 1)
    j_next, j_cur = 0.0, 1e-300
    j_one = 0.0
    for k in range(start, 0, -1):
        if n_lo <= k <= n_hi:
            out[k - n_lo] = j_cur
        if k == 1:
            j_one = j_cur
        j_prev = (2 * k + 1) / x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if abs(j_cur) > _RESCALE:
            j_cur /= _RESCALE
            j_next /= _RESCALE
            j_one /= _RESCALE
            out = [v / _RESCALE for v in out]
    if n_lo == 0:
        out[0] = j_cur
    s, c = math.sin(x), math.cos(x)
    if abs(s) >= abs(c):
        scale = (s / x) / j_cur
    else:
        scale = (s / (x * x) - c / x) / j_one
    factor = scale * math.sqrt(2.0 * x / math.pi)
    return [v * factor for v in out]


def _sequence(twice_lo: int, count: int, x: float) -> list[float]:
    """J_nu(x) for nu = twice_lo/2, twice_lo/2 + 1, ... (count values)."""
    if x <= SERIES_LIMIT:
        return [_series(twice_lo / 2 + i, x) for i in range(count)]
    if twice_lo % 2 == 0:
        n0 = twice_lo // 2
        return _miller_integer(n0, n0 + count - 1, x)
    n0 = (twice_lo - 1) // 2
    return _miller_half(n0, n0 + count - 1, x)


def bessel_j(order: OrderLike, x: float) -> float:
    """J_nu(x) for integer or half-integer nu <= 60 and 0 <= x <= 1000."""
    order = _as_order(order)
    x = float(x)
    _check(order, x)
    return _sequence(order.twice_order, 1, x)[0]


def bessel_j_prime(order: OrderLike, x: float) -> float:
    """Derivative J_nu'(x); at x = 0 the limiting value (possibly +inf)."""
    order = _as_order(order)
    x = float(x)
    _check(order, x)
    twice = order.twice_order
    if x == 0.0:
        if twice == 1:
            return math.inf
        return 0.5 if twice == 2 else 0.0
    if twice == 0:
        return -_sequence(2, 1, x)[0]
    if twice == 1:
        j_half, j_three_half = _sequence(1, 2, x)
        return 0.5 / x * j_half - j_three_half
    below, _, above = _sequence(twice - 2, 3, x)
    return 0.5 * (below - above)


def bessel_j_and_prime(order: OrderLike, x: float) -> tuple[float, float]:
    """(J_nu(x), J_nu'(x)) from one recurrence sweep, for x > 0."""
    order = _as_order(order)
    x = float(x)
    _check(order, x)
    if x == 0.0:
        return bessel_j(order, 0.0), bessel_j_prime(order, 0.0)
    twice = order.twice_order
    if twice >= 2:
        below, value, above = _sequence(twice - 2, 3, x)
        return value, 0.5 * (below - above)
    value, above = _sequence(twice, 2, x)
    return value, order.nu / x * value - above


def bessel_j_array(order: OrderLike, x) -> np.ndarray:
    """Elementwise J_nu over an array of arguments."""
    order = _as_order(order)
    arr = np.asarray(x, dtype=float)
    flat = [bessel_j(order, v) for v in arr.ravel()]
    return np.array(flat, dtype=float).reshape(arr.shape)


def legendre_assoc(l: int, k: int, t):
    """Associated Legendre function P_l^k(t) without the Condon-Shortley phase.

    ``t`` may be a scalar or a numpy array; ``k = 0`` gives the Legendre
    polynomial P_l.
    """
    if l < 0 or k < 0 or k > l:
        raise DomainError(f"need 0 <= k <= l, got l={l}, k={k}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(np.abs(t_arr) > 1.0):
        raise DomainError("legendre_assoc requires |t| <= 1")
    s = np.sqrt(np.maximum(0.0, 1.0 - t_arr * t_arr))
    p_kk = np.ones_like(t_arr)
    for i in range(1, k + 1):
        p_kk = p_kk * (2 * i - 1) * s
    if l == k:
        result = p_kk
    else:
        p_prev, p_cur = p_kk, (2 * k + 1) * t_arr * p_kk
        for n in range(k + 1, l):
            p_prev, p_cur = p_cur, ((2 * n + 1) * t_arr * p_cur - (n + k) * p_prev) / (n - k + 1)
        result = p_cur
    if np.ndim(t) == 0:
        return float(result)
    return result
