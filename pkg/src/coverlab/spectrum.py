"""Bottom of spectrum of the weighted operator L + a V, and what it implies.

The generalized problem (L + a diag(V mu)) f = lambda diag(mu) f is
symmetrized with M^{-1/2} so one standard symmetric eigensolve suffices;
dense below DENSE_LIMIT vertices, shift-inverted Lanczos above.  Every
result carries an explicit residual and is rejected past 1e-9.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import fsum
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal
from scipy.sparse import csc_matrix
from scipy.sparse.linalg import eigsh

from .errors import BudgetExceededError, InequalityViolation, InputError, NumericalError
from .geometry import (
    DEFAULT_WINDOW_BUDGET,
    CompactFunction,
    VoltageCover,
    WeightedGraph,
    as_potential,
    base_function,
    quadratic_form,
)

DENSE_LIMIT = 2000
DEFAULT_SIZE_LIMIT = 5000
RESIDUAL_TOLERANCE = 1e-9

# sign threshold for classifying an eigenvalue as nonnegative: well above
# solver noise, far below any honest spectral quantity in these scenarios
SIGN_FLOOR = 1e-12


@dataclass(frozen=True)
class SpectralResult:
    lambda_min: float
    eigenvector: tuple[float, ...]
    residual: float


def _smallest_pair(diag: np.ndarray, rows: np.ndarray, cols: np.ndarray,
                   weights: np.ndarray, mu: np.ndarray, seed: int) -> tuple[float, np.ndarray, float]:
    """Smallest eigenpair of D (diag + off) D with D = diag(mu^-1/2).

    rows/cols/weights give every off-diagonal entry once per direction.
    Returns (lambda, eigenvector in original coordinates, residual).
    """
    n = len(diag)
    d = 1.0 / np.sqrt(mu)
    diag_s = diag * d * d
    off_s = weights * d[rows] * d[cols]
    A = csc_matrix((np.concatenate([off_s, diag_s]),
                    (np.concatenate([rows, np.arange(n)]),
                     np.concatenate([cols, np.arange(n)]))), shape=(n, n))
    if n <= DENSE_LIMIT:
        vals, vecs = eigh(A.toarray(), subset_by_index=[0, 0])
        lam = float(vals[0])
        y = vecs[:, 0]
    else:
        # Gershgorin floor keeps the shift strictly below the spectrum
        row_abs = np.abs(A).sum(axis=1).A1 - np.abs(diag_s)
        sigma = float((diag_s - row_abs).min()) - 1.0
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(n)
        vals, vecs = eigsh(A, k=1, sigma=sigma, which="LM", v0=v0, tol=0)
        lam = float(vals[0])
        y = vecs[:, 0]
    y = y / np.linalg.norm(y)
    residual = float(np.max(np.abs(A @ y - lam * y)))
    if residual > RESIDUAL_TOLERANCE:
        raise NumericalError(
            f"eigensolve residual {residual:.3e} exceeds {RESIDUAL_TOLERANCE:.0e}"
        )
    f = d * y
    pivot = int(np.argmax(np.abs(f)))
    if f[pivot] < 0:
        f = -f
    return lam, f, residual


def min_eigenvalue(graph: WeightedGraph, V, a: float,
                   size_limit: int = DEFAULT_SIZE_LIMIT, seed: int = 0) -> SpectralResult:
    """Bottom of the mu-weighted spectrum of L + a V on a finite graph.

    Connectivity is enforced by WeightedGraph itself; this only guards
    the size budget and the solver tolerance.
    """
    n = graph.vertex_count
    if n > size_limit:
        raise BudgetExceededError(
            f"graph has {n} vertices, above the eigensolve budget {size_limit}",
            partial_count=n,
        )
    pot = as_potential(V, graph)
    mu = np.array(graph.mu)
    diag = np.array([graph.weighted_degree(v) + a * pot[v] * graph.mu[v] for v in range(n)])
    rows, cols, weights = [], [], []
    for u, v, w in graph.edges:
        rows.extend((u, v))
        cols.extend((v, u))
        weights.extend((-w, -w))
    lam, f, residual = _smallest_pair(
        diag, np.array(rows, dtype=int), np.array(cols, dtype=int),
        np.array(weights, dtype=float), mu, seed,
    )
    return SpectralResult(lam, tuple(float(x) for x in f), residual)


def rayleigh(graph: WeightedGraph, V, a: float, f) -> float:
    """Quadratic form over the mu-weighted square norm of f."""
    func = base_function(f, graph)
    if func.is_zero():
        raise InputError("Rayleigh quotient of the zero function is undefined")
    norm = fsum(func(v) ** 2 * graph.mu[v] for v in sorted(func.support))
    return quadratic_form(graph, V, a, func) / norm


@dataclass(frozen=True)
class WindowValue:
    radius: int
    value: float
    size: int


def dirichlet_window(cover: VoltageCover, root_tile, radius: int, V, a: float,
                     seed: int = 0, max_points: int = DEFAULT_WINDOW_BUDGET) -> WindowValue:
    """Dirichlet bottom eigenvalue of the hop ball around one tile.

    Functions vanish outside the ball, so each boundary edge contributes
    its full conductance to the diagonal; the value is non-increasing in
    the radius and never certifies positivity of the infinite cover,
    only refutes it when negative.
    """
    pot = as_potential(V, cover.base)
    window = cover.ball(cover.tile(root_tile), radius, max_points=max_points)
    index = {p: i for i, p in enumerate(window)}
    n = len(window)
    mu = np.array([cover.measure(p) for p in window])
    diag = np.zeros(n)
    rows, cols, weights = [], [], []
    for p in window:
        i = index[p]
        acc = []
        for q, w in cover.neighbors(p):
            acc.append(w)
            j = index.get(q)
            if j is not None and j != i:
                rows.append(i)
                cols.append(j)
                weights.append(-w)
        diag[i] = fsum(acc) + a * pot[p[0]] * cover.measure(p)
    lam, _f, _residual = _smallest_pair(
        diag, np.array(rows, dtype=int), np.array(cols, dtype=int),
        np.array(weights, dtype=float), mu, seed,
    )
    return WindowValue(radius=radius, value=lam, size=n)


def dirichlet_lambda0(cover: VoltageCover, root_tile, radius: int, V, a: float,
                      seed: int = 0, max_points: int = DEFAULT_WINDOW_BUDGET) -> float:
    return dirichlet_window(cover, root_tile, radius, V, a, seed, max_points).value


def dirichlet_profile(cover: VoltageCover, root_tile, radii: Iterable[int], V, a: float,
                      seed: int = 0, max_points: int = DEFAULT_WINDOW_BUDGET) -> tuple[WindowValue, ...]:
    return tuple(
        dirichlet_window(cover, root_tile, r, V, a, seed, max_points) for r in radii
    )


def regular_tree_dirichlet_value(degree: int, vertex_radius: int) -> float:
    """Dirichlet bottom eigenvalue of the radius-R vertex ball in the
    d-regular infinite tree, via the exact radial reduction.

    The ball's ground state is radial (it is the unique positive
    eigenvector and the ball's automorphisms act transitively on each
    sphere), so the problem collapses to a tridiagonal chain over
    shells: diagonal d everywhere, couplings sqrt(d) then sqrt(d-1).
    Converges to d - 2 sqrt(d-1) as the radius grows.
    """
    if degree < 2:
        raise InputError(f"tree degree must be >= 2, got {degree}")
    if vertex_radius < 0:
        raise InputError(f"radius must be nonnegative, got {vertex_radius}")
    m = vertex_radius + 1
    diag = np.full(m, float(degree))
    if m == 1:
        return float(degree)
    off = np.full(m - 1, math.sqrt(degree - 1.0))
    off[0] = math.sqrt(float(degree))
    vals = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0), eigvals_only=True)
    return float(vals[0])


@dataclass(frozen=True)
class StabilityInterval:
    """Closed set {a : lambda_min(a) >= 0}; an interval containing 0."""

    lower: float  # -inf when V <= 0 everywhere
    upper: float  # +inf when V >= 0 everywhere
    endpoint_tolerance: float

    def contains(self, a: float) -> bool:
        return self.lower <= a <= self.upper


MAX_BRACKET = 2.0**60


def stability_interval(graph: WeightedGraph, V, tol: float = 1e-6,
                       size_limit: int = DEFAULT_SIZE_LIMIT, seed: int = 0) -> StabilityInterval:
    """Endpoints of {a : lambda_min(a) >= 0} by sign bisection.

    lambda_min is a minimum of functions affine in a, hence concave, and
    vanishes at a = 0 on connected graphs, so the set is a closed
    interval around 0.  One-sided infiniteness is decided exactly by the
    sign pattern of V; finite endpoints are bracketed by doubling from
    |a| = 1 and bisected to width tol.
    """
    if tol <= 0:
        raise InputError(f"tolerance must be positive, got {tol}")
    pot = as_potential(V, graph)
    if pot.is_zero():
        return StabilityInterval(-math.inf, math.inf, 0.0)

    cache: dict[float, float] = {}

    def lam(a: float) -> float:
        if a not in cache:
            cache[a] = min_eigenvalue(graph, pot, a, size_limit, seed).lambda_min
        return cache[a]

    def endpoint(sign: float) -> tuple[float, float]:
        hi = 1.0
        lo = 0.0
        while lam(sign * hi) >= 0.0:
            lo = hi
            hi *= 2.0
            if hi > MAX_BRACKET:
                return sign * math.inf, 0.0
        while hi - lo > tol:
            mid = (lo + hi) / 2.0
            if lam(sign * mid) >= 0.0:
                lo = mid
            else:
                hi = mid
        return sign * (lo + hi) / 2.0, (hi - lo) / 2.0

    if all(v >= 0.0 for v in pot.values):
        upper, tol_up = math.inf, 0.0
    else:
        upper, tol_up = endpoint(1.0)
    if all(v <= 0.0 for v in pot.values):
        lower, tol_dn = -math.inf, 0.0
    else:
        lower, tol_dn = endpoint(-1.0)
    return StabilityInterval(lower, upper, max(tol_up, tol_dn))


@dataclass(frozen=True)
class CorollaryReport:
    zero_potential: bool
    interval: StabilityInterval
    rayleigh_constant: tuple[tuple[float, float], ...]
    lambda_samples: tuple[tuple[float, float], ...]


def corollary_check(graph: WeightedGraph, V,
                    a_samples: Sequence[float] = (1.0, -1.0, 0.5, -0.5),
                    tol: float = 1e-6, seed: int = 0) -> CorollaryReport:
    """Balanced potentials pin the stability interval to the point {0}.

    Requires sum V mu = 0 exactly (fsum is exactly rounded, so integer
    style potentials balance to literal zero).  The constant function
    then has zero energy at every a, forcing lambda_min(a) <= 0, and any
    nonzero balanced V tilts some direction strictly negative; the
    operation audits exactly that, or the full line when V is zero.
    """
    pot = as_potential(V, graph)
    balance = fsum(pot[v] * graph.mu[v] for v in range(graph.vertex_count))
    if balance != 0.0:
        raise InputError(f"potential is not balanced: sum V mu = {balance!r}")
    interval = stability_interval(graph, pot, tol=tol, seed=seed)
    if pot.is_zero():
        if not (math.isinf(interval.lower) and math.isinf(interval.upper)):
            raise InequalityViolation(
                f"zero potential must give the full line, got {interval}"
            )
        return CorollaryReport(True, interval, (), ())

    ones = CompactFunction.on_vertices([1.0] * graph.vertex_count)
    rq_rows = []
    lam_rows = []
    for a in a_samples:
        rq = rayleigh(graph, pot, a, ones)
        if rq != 0.0:
            raise InequalityViolation(
                f"constant-function energy at a={a} is {rq!r}, expected exact 0"
            )
        rq_rows.append((float(a), rq))
        lam = min_eigenvalue(graph, pot, a, seed=seed).lambda_min
        if not lam < -SIGN_FLOOR:
            raise InequalityViolation(
                f"lambda_min({a}) = {lam!r} is not strictly negative"
            )
        lam_rows.append((float(a), lam))
    if not (abs(interval.lower) <= tol and abs(interval.upper) <= tol):
        raise InequalityViolation(
            f"stability interval {interval} is not [0, 0] within {tol}"
        )
    return CorollaryReport(False, interval, tuple(rq_rows), tuple(lam_rows))
