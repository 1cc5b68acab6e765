"""Spectrum of the Neumann Laplacian on the unit ball B^N.

Eigenvalues are ``beta = x**2`` where ``x`` is a positive root of

    g_l(x) = J'_nu(x) - (N - 2) / (2 x) * J_nu(x),   nu = l + (N - 2) / 2,

together with ``beta = 0`` (the constants).  Each root of degree ``l``
contributes a copy of the SO(N)-irreducible space of spherical harmonics of
degree ``l`` to the eigenspace.
"""

from __future__ import annotations

import json
import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .errors import ConvergenceError, DomainError, NotAnEigenvalueError
from .special_functions import BesselOrder, bessel_j_and_prime

log = logging.getLogger(__name__)

SCAN_STEP = 0.05
BISECTION_WIDTH = 1e-13
MAX_BISECTIONS = 200
ROOT_RESIDUAL = 1e-11
DEFAULT_COINCIDENCE_TOL = 1e-9
CACHE_VERSION = 1


@dataclass(frozen=True)
class NeumannEigenvalue:
    """One eigenvalue beta_{lm} = x_{lm}**2 of -Laplace on B^N."""

    dimension_N: int
    degree_l: int
    radial_index_m: int
    root_x: float
    harmonic_dim: int

    def __post_init__(self):
        if self.radial_index_m == 0 and not (self.degree_l == 0 and self.root_x == 0.0):
            raise DomainError("radial index 0 is reserved for the constant mode x_00 = 0")

    @property
    def beta(self) -> float:
        return self.root_x * self.root_x


@dataclass(frozen=True)
class EigenspaceDecomposition:
    """SO(N)-isotypic blocks ``(degree_l, harmonic_dim)`` of one eigenspace."""

    beta: float
    blocks: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not self.blocks:
            raise DomainError("an eigenspace has at least one block")
        degrees = [b[0] for b in self.blocks]
        if any(a >= b for a, b in zip(degrees, degrees[1:])):
            raise DomainError("block degrees must be strictly increasing")

    @property
    def total_dim(self) -> int:
        return sum(d for _, d in self.blocks)

    @property
    def fixed_dim(self) -> int:
        return 1 if self.blocks[0][0] == 0 else 0

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(b[0] for b in self.blocks)


class EigenvalueList(list):
    """Sorted list of :class:`NeumannEigenvalue` remembering how it was enumerated."""

    def __init__(self, items: Iterable[NeumannEigenvalue], N: int, beta_max: float,
                 coincidence_tol: float = DEFAULT_COINCIDENCE_TOL):
        super().__init__(items)
        self.N = N
        self.beta_max = beta_max
        self.coincidence_tol = coincidence_tol

    def distinct(self) -> list[EigenspaceDecomposition]:
        """Group coincident entries into eigenspaces, ascending in beta."""
        groups: list[list[NeumannEigenvalue]] = []
        for ev in self:
            if groups:
                ref = groups[-1][0].root_x
                if abs(ev.root_x - ref) <= self.coincidence_tol * (1.0 + ref):
                    groups[-1].append(ev)
                    continue
            groups.append([ev])
        out = []
        for g in groups:
            if len(g) > 1:
                log.warning("coincident Neumann roots merged: %s",
                            [(e.degree_l, e.radial_index_m, e.root_x) for e in g])
            blocks = tuple(sorted((e.degree_l, e.harmonic_dim) for e in g))
            out.append(EigenspaceDecomposition(beta=g[0].beta, blocks=blocks))
        return out


def harmonic_dim(N: int, l: int) -> int:
    """Dimension of the spherical harmonics of degree l on S^{N-1}."""
    if N < 2 or l < 0:
        raise DomainError(f"need N >= 2 and l >= 0, got N={N}, l={l}")
    if N == 2:
        return 1 if l == 0 else 2
    return (2 * l + N - 2) * math.factorial(N - 3 + l) // (math.factorial(l) * math.factorial(N - 2))


def radial_boundary_value(N: int, l: int, x: float) -> float:
    """Neumann boundary function g_l(x) whose positive roots give eigenvalues."""
    if not (x > 0.0):
        raise DomainError(f"radial_boundary_value needs x > 0, got {x}")
    value, prime = bessel_j_and_prime(BesselOrder.for_ball(N, l), x)
    return prime - (N - 2) / (2.0 * x) * value


def _boundary_and_slope(N: int, l: int, x: float) -> tuple[float, float]:
    nu = l + (N - 2) / 2.0
    c = (N - 2) / 2.0
    value, prime = bessel_j_and_prime(BesselOrder.for_ball(N, l), x)
    second = -prime / x - (1.0 - nu * nu / (x * x)) * value
    g = prime - c / x * value
    slope = second + c / (x * x) * value - c / x * prime
    return g, slope


def _refine(N: int, l: int, a: float, b: float, ga: float) -> tuple[float, float]:
    """Bisection to width BISECTION_WIDTH, then one guarded Newton step."""
    for _ in range(MAX_BISECTIONS):
        if b - a <= BISECTION_WIDTH:
            break
        mid = 0.5 * (a + b)
        gm = radial_boundary_value(N, l, mid)
        if gm == 0.0:
            a = b = mid
            break
        if (gm > 0) == (ga > 0):
            a, ga = mid, gm
        else:
            b = mid
    else:
        raise ConvergenceError(f"bisection for (N={N}, l={l}) stalled on [{a}, {b}]")
    x = 0.5 * (a + b)
    g, slope = _boundary_and_slope(N, l, x)
    if slope != 0.0:
        polished = x - g / slope
        if abs(polished - x) <= 2 * BISECTION_WIDTH:
            g_new = radial_boundary_value(N, l, polished)
            if abs(g_new) <= abs(g):
                x, g = polished, g_new
    if abs(g) > ROOT_RESIDUAL:
        raise ConvergenceError(f"root near {x} for (N={N}, l={l}) has residual {g:.3e}")
    return x, abs(g)


def _scan(N: int, l: int, count: Optional[int] = None, beyond: Optional[float] = None,
          step: float = SCAN_STEP) -> list[tuple[float, float]]:
    """Positive roots of g_l in increasing order, as (x, residual).

    Stops after ``count`` roots, or once a root larger than ``beyond`` is found.
    Grid points are ``k * step`` so repeated scans give identical roots.
    """
    roots: list[tuple[float, float]] = []
    k = 1
    a = step
    ga = radial_boundary_value(N, l, a)
    while True:
        if count is not None and len(roots) >= count:
            return roots
        if beyond is not None and roots and roots[-1][0] > beyond:
            return roots
        k += 1
        b = k * step
        gb = radial_boundary_value(N, l, b)
        if ga == 0.0:
            roots.append((a, 0.0))
        elif (ga > 0) != (gb > 0) and gb != 0.0:
            roots.append(_refine(N, l, a, b, ga))
        a, ga = b, gb


class RootCache:
    """Versioned JSON cache of Neumann roots for one ball dimension.

    Reads may happen from several threads; writes are serialised.
    """

    def __init__(self, N: int, path: Optional[Path] = None):
        self.N = N
        self.path = Path(path) if path is not None else None
        self._roots: dict[int, list[tuple[float, float]]] = {}
        self._lock = threading.Lock()
        self.dirty = False
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self) -> None:
        doc = json.loads(self.path.read_text())
        if doc.get("version") != CACHE_VERSION:
            raise DomainError(f"unsupported root cache version {doc.get('version')!r}")
        if doc.get("N") != self.N:
            log.info("root cache %s is for N=%s, ignoring", self.path, doc.get("N"))
            return
        by_l: dict[int, list[tuple[int, float, float]]] = {}
        for e in doc["entries"]:
            by_l.setdefault(int(e["l"]), []).append((int(e["m"]), float(e["x"]), float(e["residual"])))
        for l, rows in by_l.items():
            rows.sort()
            # keep only the contiguous prefix m = 1, 2, ...
            prefix = []
            for i, (m, x, r) in enumerate(rows, start=1):
                if m != i:
                    break
                prefix.append((x, r))
            self._roots[l] = prefix

    def roots(self, l: int, count: int) -> list[tuple[float, float]]:
        have = self._roots.get(l, [])
        if len(have) >= count:
            return have[:count]
        fresh = _scan(self.N, l, count=count)
        with self._lock:
            if len(self._roots.get(l, [])) < count:
                self._roots[l] = fresh
                self.dirty = True
        return fresh

    def roots_below(self, l: int, x_limit: float) -> list[tuple[float, float]]:
        have = self._roots.get(l, [])
        if have and have[-1][0] > x_limit:
            return [r for r in have if r[0] <= x_limit]
        # one root past the limit proves the prefix is complete
        extra = _scan(self.N, l, beyond=x_limit)
        with self._lock:
            if len(self._roots.get(l, [])) < len(extra):
                self._roots[l] = extra
                self.dirty = True
        return [r for r in extra if r[0] <= x_limit]

    def to_document(self) -> dict:
        entries = []
        for l in sorted(self._roots):
            for m, (x, r) in enumerate(self._roots[l], start=1):
                entries.append({"l": l, "m": m, "x": x, "residual": r})
        return {"version": CACHE_VERSION, "N": self.N, "entries": entries}

    def save(self, path: Optional[Path] = None) -> None:
        target = Path(path) if path is not None else self.path
        if target is None:
            raise DomainError("no cache path configured")
        with self._lock:
            target.write_text(json.dumps(self.to_document(), indent=1) + "\n")
            self.dirty = False


_shared_caches: dict[int, RootCache] = {}
_shared_lock = threading.Lock()


def shared_cache(N: int) -> RootCache:
    """Process-wide in-memory root cache for dimension N."""
    with _shared_lock:
        if N not in _shared_caches:
            _shared_caches[N] = RootCache(N)
        return _shared_caches[N]


def neumann_roots(N: int, l: int, m_max: int, cache: Optional[RootCache] = None) -> list[float]:
    """First ``m_max`` positive roots x_{l1} < x_{l2} < ... of the boundary function."""
    if l < 0 or l > 60:
        raise DomainError(f"degree l={l} outside [0, 60]")
    if m_max < 1 or m_max > 200:
        raise DomainError(f"m_max={m_max} outside [1, 200]")
    if cache is None or cache.N != N:
        cache = shared_cache(N)
    return [x for x, _ in cache.roots(l, m_max)]


def eigenvalues_up_to(N: int, beta_max: float, cache: Optional[RootCache] = None,
                      threads: int = 1,
                      coincidence_tol: float = DEFAULT_COINCIDENCE_TOL) -> EigenvalueList:
    """Every beta_{lm} <= beta_max (including beta_00 = 0), sorted by (beta, l)."""
    if not (beta_max > 0) or beta_max > 1e6:
        raise DomainError(f"beta_max must lie in (0, 1e6], got {beta_max}")
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    if cache is None or cache.N != N:
        cache = shared_cache(N)
    x_limit = math.sqrt(beta_max)

    # Degrees are scanned in chunks; the first degree whose smallest root
    # exceeds sqrt(beta_max) ends the enumeration.
    per_degree: dict[int, list[tuple[float, float]]] = {}
    first_roots: list[float] = []
    l = 0
    chunk = max(1, threads)
    done = False
    with ThreadPoolExecutor(max_workers=chunk) as pool:
        while not done:
            degrees = list(range(l, l + chunk))
            results = list(pool.map(lambda d: cache.roots_below(d, x_limit), degrees))
            for d, res in zip(degrees, results):
                # degree 0 starts at the constant mode x_00 = 0
                first = 0.0 if d == 0 else cache.roots(d, 1)[0][0]
                if first_roots and first <= first_roots[-1]:
                    raise ConvergenceError(
                        f"smallest roots not increasing in l at l={d} (N={N}); enumeration bound invalid")
                first_roots.append(first)
                if first > x_limit:
                    done = True
                    break
                per_degree[d] = res
            l += chunk

    items = [NeumannEigenvalue(N, 0, 0, 0.0, harmonic_dim(N, 0))]
    for d, roots in per_degree.items():
        dim = harmonic_dim(N, d)
        for m, (x, _) in enumerate(roots, start=1):
            items.append(NeumannEigenvalue(N, d, m, x, dim))
    items.sort(key=lambda e: (e.beta, e.degree_l))
    return EigenvalueList(items, N, beta_max, coincidence_tol)


def eigenspace_decomposition(N: int, beta: float, coincidence_tol: float = DEFAULT_COINCIDENCE_TOL,
                             cache: Optional[RootCache] = None) -> EigenspaceDecomposition:
    """SO(N) block structure of the eigenspace of ``beta``."""
    if beta < 0:
        raise NotAnEigenvalueError(f"{beta} is negative")
    x = math.sqrt(beta)
    tol = coincidence_tol * (1.0 + x)
    if cache is None or cache.N != N:
        cache = shared_cache(N)
    blocks = []
    if x <= tol:
        blocks.append((0, harmonic_dim(N, 0)))
    l = 0
    while True:
        if l > 0 and cache.roots(l, 1)[0][0] > x + tol:
            break
        for root, _ in cache.roots_below(l, x + tol):
            if abs(root - x) <= tol:
                if not blocks or blocks[-1][0] != l:
                    blocks.append((l, harmonic_dim(N, l)))
                break
        l += 1
    if not blocks:
        raise NotAnEigenvalueError(f"beta={beta} is not a Neumann eigenvalue of B^{N}")
    if len(blocks) > 1:
        log.warning("beta=%s lies in several A_l: degrees %s", beta, [b[0] for b in blocks])
    return EigenspaceDecomposition(beta=beta, blocks=tuple(blocks))
