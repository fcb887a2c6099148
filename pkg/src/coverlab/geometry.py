"""Weighted graphs as discrete spaces, voltage covers, tilings, cutoffs.

The discrete model: a finite connected graph with vertex measure mu and
edge conductances w carries the quadratic form

    Q(f) = sum_edges w(e) (f(u) - f(v))^2  +  a * sum_v V(v) f(v)^2 mu(v).

A voltage cover assigns a word in a group action's generators to each
base edge; cover vertices are (base vertex, fiber point) pairs, and each
fiber point indexes one tile, a full copy of the base vertex set.  The
cover is enumerated lazily around a root tile, never materialized.
"""

from __future__ import annotations

import math
import threading
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import fsum
from typing import Any, Iterable, Mapping, Sequence

from .actions import GroupAction, word_action
from .errors import BudgetExceededError, InputError

DEFAULT_WINDOW_BUDGET = 10**6


def _check_real(value, label: str, positive: bool = False) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise InputError(f"{label} is not a real number: {value!r}") from None
    if not math.isfinite(x):
        raise InputError(f"{label} must be finite, got {x!r}")
    if positive and x <= 0:
        raise InputError(f"{label} must be positive, got {x!r}")
    return x


class WeightedGraph:
    """Finite connected simple graph with mu > 0 and conductances w > 0.

    Vertices are 0..n-1.  Edges are stored canonically as (u, v, w) with
    u < v; loops and parallel edges are rejected, as is any graph that
    is not connected.
    """

    def __init__(self, mu: Sequence, edges: Iterable[tuple]):
        self.mu = tuple(_check_real(m, f"mu[{i}]", positive=True) for i, m in enumerate(mu))
        n = len(self.mu)
        if n == 0:
            raise InputError("a graph needs at least one vertex")
        canon = {}
        for k, edge in enumerate(edges):
            try:
                u, v, w = edge
            except (TypeError, ValueError):
                raise InputError(f"edge {k} is not a (u, v, w) triple: {edge!r}") from None
            if not (isinstance(u, int) and isinstance(v, int)):
                raise InputError(f"edge {k} endpoints must be integers: {edge!r}")
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge {k} endpoint out of range 0..{n - 1}: {edge!r}")
            if u == v:
                raise InputError(f"edge {k} is a loop at vertex {u}")
            key = (min(u, v), max(u, v))
            if key in canon:
                raise InputError(f"duplicate edge between {key[0]} and {key[1]}")
            canon[key] = _check_real(w, f"w[{k}]", positive=True)
        self.edges = tuple((u, v, canon[(u, v)]) for (u, v) in sorted(canon))
        adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        self._adjacency = tuple(tuple(sorted(row)) for row in adj)
        seen = {0}
        queue = deque([0])
        while queue:
            x = queue.popleft()
            for y, _w in self._adjacency[x]:
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        if len(seen) != n:
            missing = sorted(set(range(n)) - seen)
            raise InputError(f"graph is not connected; unreachable vertices {missing}")

    @property
    def vertex_count(self) -> int:
        return len(self.mu)

    def neighbors(self, v: int) -> tuple[tuple[int, float], ...]:
        return self._adjacency[v]

    def weighted_degree(self, v: int) -> float:
        return fsum(w for _u, w in self._adjacency[v])

    def total_measure(self) -> float:
        return fsum(self.mu)


def path_graph(n: int, w: float = 1.0, mu: float = 1.0) -> WeightedGraph:
    if n < 1:
        raise InputError(f"path length must be >= 1, got {n}")
    return WeightedGraph([mu] * n, [(i, i + 1, w) for i in range(n - 1)])


def cycle_graph(n: int, w: float = 1.0, mu: float = 1.0) -> WeightedGraph:
    if n < 3:
        raise InputError(f"cycle length must be >= 3, got {n}")
    return WeightedGraph([mu] * n, [(i, (i + 1) % n, w) for i in range(n)])


def complete_graph(n: int, w: float = 1.0, mu: float = 1.0) -> WeightedGraph:
    if n < 2:
        raise InputError(f"complete graph needs >= 2 vertices, got {n}")
    edges = [(i, j, w) for i in range(n) for j in range(i + 1, n)]
    return WeightedGraph([mu] * n, edges)


def grid_torus(rows: int, cols: int, w: float = 1.0, mu: float = 1.0) -> WeightedGraph:
    """Doubly periodic grid; sides must be >= 3 to stay a simple graph."""
    if rows < 3 or cols < 3:
        raise InputError(f"torus sides must be >= 3, got {rows}x{cols}")
    def vid(r: int, c: int) -> int:
        return (r % rows) * cols + (c % cols)
    edges = []
    for r in range(rows):
        for c in range(cols):
            edges.append((vid(r, c), vid(r, c + 1), w))
            edges.append((vid(r, c), vid(r + 1, c), w))
    return WeightedGraph([mu] * (rows * cols), edges)


class Potential:
    """Vertex potential with its positive/negative part split."""

    def __init__(self, values: Sequence):
        self.values = tuple(_check_real(v, f"V[{i}]") for i, v in enumerate(values))
        self.plus = tuple(max(v, 0.0) for v in self.values)
        self.minus = tuple(max(-v, 0.0) for v in self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, v: int) -> float:
        return self.values[v]

    def is_zero(self) -> bool:
        return all(v == 0.0 for v in self.values)


def as_potential(V, graph: WeightedGraph) -> Potential:
    pot = V if isinstance(V, Potential) else Potential(V)
    if len(pot) != graph.vertex_count:
        raise InputError(
            f"potential has {len(pot)} entries for {graph.vertex_count} vertices"
        )
    return pot


class CompactFunction:
    """Finitely supported real function; exact zeros are dropped."""

    def __init__(self, values: Mapping):
        clean = {}
        for point, value in values.items():
            x = float(value)
            if not math.isfinite(x):
                raise InputError(f"function value at {point!r} is not finite")
            if x != 0.0:
                clean[point] = x
        self.values = clean
        self.support = frozenset(clean)

    def __call__(self, point) -> float:
        return self.values.get(point, 0.0)

    def is_zero(self) -> bool:
        return not self.values

    @classmethod
    def on_vertices(cls, values: Sequence) -> "CompactFunction":
        return cls({v: x for v, x in enumerate(values)})


def base_function(f, graph: WeightedGraph) -> CompactFunction:
    """Coerce a sequence or CompactFunction to a function on base vertices."""
    if isinstance(f, CompactFunction):
        for v in f.support:
            if not (isinstance(v, int) and 0 <= v < graph.vertex_count):
                raise InputError(f"support point {v!r} is not a base vertex")
        return f
    if len(f) != graph.vertex_count:
        raise InputError(f"function has {len(f)} entries for {graph.vertex_count} vertices")
    return CompactFunction.on_vertices(f)


def quadratic_form(graph: WeightedGraph, V, a: float, f) -> float:
    """Q(f) = sum w (df)^2 + a * sum V f^2 mu on the base graph."""
    pot = as_potential(V, graph)
    func = base_function(f, graph)
    grad = fsum(
        w * (func(u) - func(v)) ** 2
        for u, v, w in graph.edges
        if u in func.support or v in func.support
    )
    pot_term = fsum(pot[v] * func(v) ** 2 * graph.mu[v] for v in sorted(func.support))
    return grad + a * pot_term


# ---------------------------------------------------------------------------
# voltage covers


class VoltageCover:
    """Cover of a finite base graph driven by edge voltages.

    Vertices are (v, x) with v a base vertex and x a carrier point; the
    base edge {u, v} (u < v) with voltage word s joins (u, x) to
    (v, s.x) for every fiber point x.  Tiles are indexed by fiber
    points: tile(x) = {(v, x) : v in base}.  Build through build_cover,
    which validates voltages and checks connectivity on a window.
    """

    def __init__(self, base: WeightedGraph, carrier: GroupAction,
                 voltages: Mapping[tuple[int, int], tuple[int, ...]]):
        self.base = base
        self.carrier = carrier
        self.voltages = dict(voltages)
        # oriented[(u, v)] maps the u-side fiber point to the v-side one
        oriented: dict[tuple[int, int], tuple[int, ...]] = {}
        for (u, v), word in self.voltages.items():
            oriented[(u, v)] = word
            oriented[(v, u)] = tuple(-g for g in reversed(word))
        per_vertex: list[list[tuple[int, float, tuple[int, ...]]]] = [
            [] for _ in range(base.vertex_count)
        ]
        for u, v, w in base.edges:
            per_vertex[u].append((v, w, oriented.get((u, v), ())))
            per_vertex[v].append((u, w, oriented.get((v, u), ())))
        self._stencil = tuple(tuple(sorted(row)) for row in per_vertex)
        self._ball_cache: dict = {}
        self._ball_lock = threading.Lock()
        self._fiber_action: GroupAction | None = None

    # -- canonical ordering ------------------------------------------------

    def sort_key(self, p) -> tuple:
        v, x = p
        return (v, self.carrier.sort_key(x))

    def encode(self, p) -> str:
        v, x = p
        return f"{v}@{self.carrier.encode(x)}"

    # -- structure ---------------------------------------------------------

    def measure(self, p) -> float:
        return self.base.mu[p[0]]

    def tile(self, x) -> tuple:
        return tuple((v, x) for v in range(self.base.vertex_count))

    def tile_of(self, p):
        return p[1]

    def neighbors(self, p) -> list[tuple[tuple, float]]:
        v, x = p
        out = []
        for u, w, word in self._stencil[v]:
            y = x
            for letter in reversed(word):
                y = self.carrier.apply_fn(letter, y)
            out.append(((u, y), w))
        return out

    @property
    def fiber_action(self) -> GroupAction:
        """Action on fiber points generated by the distinct voltage words.

        Two tiles are adjacent in the cover exactly when some generator
        of this action maps one index to the other, because every
        inter-tile edge applies one voltage word or its inverse.
        """
        if self._fiber_action is None:
            words = []
            seen = set()
            for u, v, _w in self.base.edges:
                word = self.voltages.get((u, v))
                if not word:
                    continue
                marker = self._word_marker(word)
                inverse = tuple(-g for g in reversed(word))
                if marker in seen or self._word_marker(inverse) in seen:
                    continue
                seen.add(marker)
                words.append(word)
            self._fiber_action = word_action(
                self.carrier, words, name=f"fiber({self.carrier.name})"
            )
        return self._fiber_action

    def _word_marker(self, word: tuple[int, ...]):
        vectors = self.carrier.translation_vectors
        if vectors is None:
            return word
        net = [0] * len(self.carrier.origin)
        for letter in word:
            v = vectors[abs(letter) - 1]
            sign = 1 if letter > 0 else -1
            net = [c + sign * d for c, d in zip(net, v)]
        return tuple(net)

    def ball(self, roots: Iterable, radius: int, max_points: int = DEFAULT_WINDOW_BUDGET) -> tuple:
        """Cover vertices within hop-radius of the root set, sorted.

        Results are memoized; the cache is synchronized and keyed by the
        exact query, so concurrent readers always observe equal tuples.
        """
        root_set = frozenset(roots)
        if not root_set:
            raise InputError("window root set is empty")
        if radius < 0:
            raise InputError(f"radius must be nonnegative, got {radius}")
        key = (root_set, radius, max_points)
        with self._ball_lock:
            hit = self._ball_cache.get(key)
        if hit is not None:
            return hit
        seen = dict.fromkeys(sorted(root_set, key=self.sort_key), 0)
        queue = deque(seen)
        while queue:
            p = queue.popleft()
            d = seen[p]
            if d == radius:
                continue
            for q, _w in self.neighbors(p):
                if q not in seen:
                    seen[q] = d + 1
                    if len(seen) > max_points:
                        raise BudgetExceededError(
                            f"cover window exceeded {max_points} vertices at hop {d + 1}",
                            partial_count=len(seen),
                        )
                    queue.append(q)
        result = tuple(sorted(seen, key=self.sort_key))
        with self._ball_lock:
            self._ball_cache[key] = result
        return result


def build_cover(base: WeightedGraph, carrier: GroupAction,
                voltages: Mapping[tuple[int, int], Iterable[int]],
                check_connectivity: bool = True) -> VoltageCover:
    """Assemble a voltage cover and sanity-check it on a small window.

    Voltages are given per base edge (either orientation; the reversed
    orientation gets the inverted word) as words in the carrier's
    generators.  Identity (empty) words are dropped.  Connectivity is
    checked on the window of tiles within two fiber steps of the root:
    every tile vertex there must be reachable inside the window.  This
    rejects covers that fall apart (for example a voltage on a bridge),
    while infinite covers are otherwise taken on faith per window.
    """
    canon: dict[tuple[int, int], tuple[int, ...]] = {}
    edge_set = {(u, v) for u, v, _w in base.edges}
    for key, word in voltages.items():
        try:
            u, v = key
        except (TypeError, ValueError):
            raise InputError(f"voltage key {key!r} is not a vertex pair") from None
        word = tuple(word)
        for letter in word:
            carrier.check_generator(letter)
        if (u, v) in edge_set:
            cu, cv, cword = u, v, word
        elif (v, u) in edge_set:
            cu, cv, cword = v, u, tuple(-g for g in reversed(word))
        else:
            raise InputError(f"voltage on nonexistent edge {key!r}")
        if (cu, cv) in canon:
            raise InputError(f"duplicate voltage for edge ({cu}, {cv})")
        if cword:
            canon[(cu, cv)] = cword
    cover = VoltageCover(base, carrier, canon)
    if check_connectivity:
        _check_window_connectivity(cover)
    return cover


def _check_window_connectivity(cover: VoltageCover) -> None:
    fiber = cover.fiber_action
    origin = fiber.origin
    inner = {origin}
    for g in fiber.generators():
        inner.add(fiber.apply_fn(g, origin))
    window = set(inner)
    for x in list(inner):
        for g in fiber.generators():
            window.add(fiber.apply_fn(g, x))
    allowed = {(v, x) for v in range(cover.base.vertex_count) for x in window}
    root = (0, origin)
    seen = {root}
    queue = deque([root])
    while queue:
        p = queue.popleft()
        for q, _w in cover.neighbors(p):
            if q in allowed and q not in seen:
                seen.add(q)
                queue.append(q)
    required = {(v, x) for v in range(cover.base.vertex_count) for x in inner}
    missing = required - seen
    if missing:
        sample = cover.encode(min(missing, key=cover.sort_key))
        raise InputError(
            f"cover is disconnected on the checked window: {sample} unreachable "
            f"from {cover.encode(root)}"
        )


def lift_function(cover: VoltageCover, f, tiles: Iterable) -> CompactFunction:
    """Lift of a base function to finitely many tiles, zero elsewhere."""
    func = base_function(f, cover.base)
    tile_list = set(tiles)
    values = {}
    for x in tile_list:
        for v in func.support:
            values[(v, x)] = func(v)
    return CompactFunction(values)


@dataclass(frozen=True)
class CutoffFunction:
    """Ramp of width alpha from the rim of Omega toward its interior.

    values hold exact fractions min(1, d(p, complement)/alpha) for p in
    Omega and are absent (zero) outside, so the edge Lipschitz bound
    1/alpha holds exactly by construction.  collar_tiles contains every
    tile with a strictly intermediate value and every tile on either
    side of an edge where the ramp changes, including tiles outside the
    member set.
    """

    cover: VoltageCover
    members: tuple
    alpha: int
    values: Mapping
    omega: frozenset
    collar_tiles: frozenset

    def __call__(self, p) -> Fraction:
        return self.values.get(p, Fraction(0))


def cutoff(cover: VoltageCover, members: Iterable, alpha: int) -> CutoffFunction:
    """Cutoff xi(p) = min(1, hop_dist(p, complement of Omega)/alpha)."""
    member_list = tuple(sorted(set(members), key=cover.carrier.sort_key))
    if not member_list:
        raise InputError("cutoff needs a nonempty tile set")
    if not isinstance(alpha, int) or alpha < 1:
        raise InputError(f"alpha must be a positive integer, got {alpha!r}")
    omega = set()
    for x in member_list:
        omega.update(cover.tile(x))

    # multi-source BFS inward from the rim: vertices with a neighbor outside
    distance: dict = {}
    queue: deque = deque()
    for p in sorted(omega, key=cover.sort_key):
        if any(q not in omega for q, _w in cover.neighbors(p)):
            distance[p] = 1
            queue.append(p)
    while queue:
        p = queue.popleft()
        d = distance[p]
        if d >= alpha:
            continue  # deeper vertices already count as full height
        for q, _w in cover.neighbors(p):
            if q in omega and q not in distance:
                distance[q] = d + 1
                queue.append(q)

    ordered = sorted(omega, key=cover.sort_key)
    values = {}
    for p in ordered:
        d = distance.get(p)
        values[p] = Fraction(1) if d is None else Fraction(min(d, alpha), alpha)

    collar = set()
    for p, value in values.items():
        if 0 < value < 1:
            collar.add(cover.tile_of(p))
    for p in ordered:
        xp = values[p]
        for q, _w in cover.neighbors(p):
            xq = values.get(q, Fraction(0))
            if xp != xq:
                collar.add(cover.tile_of(p))
                collar.add(cover.tile_of(q))

    return CutoffFunction(
        cover=cover,
        members=member_list,
        alpha=alpha,
        values=values,
        omega=frozenset(omega),
        collar_tiles=frozenset(collar),
    )


def cover_form_parts(cover: VoltageCover, V, a: float, func: CompactFunction) -> tuple[float, float]:
    """(gradient part, signed potential part including a) of the cover form.

    Sums run over edges touching the support and over the support itself,
    in canonical order, each accumulated with exact fsum.
    """
    pot = as_potential(V, cover.base)
    support = sorted(func.support, key=cover.sort_key)
    grad_terms = []
    for p in support:
        fp = func(p)
        kp = cover.sort_key(p)
        for q, w in cover.neighbors(p):
            if q in func.support and cover.sort_key(q) < kp:
                continue  # counted from the other endpoint
            grad_terms.append(w * (fp - func(q)) ** 2)
    grad = fsum(grad_terms)
    pot_term = fsum(
        pot[p[0]] * func(p) ** 2 * cover.measure(p) for p in support
    )
    return grad, a * pot_term


def cover_quadratic_form(cover: VoltageCover, V, a: float, func: CompactFunction) -> float:
    grad, pot = cover_form_parts(cover, V, a, func)
    return grad + pot
