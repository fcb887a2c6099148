"""Finitely generated group actions with explicit point enumeration.

An action is described by a symmetric generating set: generators are the
signed integers +1..+n and -1..-n, where -i always acts as the inverse of
+i.  Points can be any hashable values; each built-in family fixes a
canonical encoding so that sets of points serialize deterministically.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from .errors import BudgetExceededError, InputError

DEFAULT_POINT_BUDGET = 10**6

# permutation group enumeration refuses to materialize groups larger than this
MAX_GROUP_ORDER = 10**4


@dataclass(frozen=True)
class GroupAction:
    """A finitely generated action given by its generator rule.

    apply_fn maps (signed generator, point) to a point and must define a
    genuine action: apply_fn(-g, apply_fn(g, x)) == x for every generator.
    translation_vectors is set only for lattice-like actions where every
    generator acts by adding a fixed integer vector; the Folner search
    uses it for the closed-form box construction.
    """

    name: str
    generator_count: int
    origin: Any
    apply_fn: Callable[[int, Any], Any] = field(repr=False)
    sort_key: Callable[[Any], Any] = field(repr=False)
    encode_fn: Callable[[Any], str] = field(repr=False)
    decode_fn: Callable[[str], Any] = field(repr=False)
    translation_vectors: tuple[tuple[int, ...], ...] | None = None

    def generators(self) -> tuple[int, ...]:
        """All signed generator ids, inverses included."""
        n = self.generator_count
        return tuple(range(1, n + 1)) + tuple(range(-1, -n - 1, -1))

    def check_generator(self, g: int) -> None:
        if not isinstance(g, int) or g == 0 or abs(g) > self.generator_count:
            raise InputError(
                f"generator id {g!r} out of range for {self.name} "
                f"(expected nonzero integer with |g| <= {self.generator_count})"
            )

    def apply(self, g: int, point: Any) -> Any:
        self.check_generator(g)
        return self.apply_fn(g, point)

    def apply_word(self, word: Iterable[int], point: Any) -> Any:
        """Apply a word of generators, leftmost letter acting last."""
        letters = tuple(word)
        for g in reversed(letters):
            point = self.apply(g, point)
        return point

    def inverse_word(self, word: Iterable[int]) -> tuple[int, ...]:
        return tuple(-g for g in reversed(tuple(word)))

    def encode(self, point: Any) -> str:
        return self.encode_fn(point)

    def decode(self, text: str) -> Any:
        return self.decode_fn(text)


def act(action: GroupAction, g: int, point: Any) -> Any:
    """Apply one signed generator to a point."""
    return action.apply(g, point)


@dataclass(frozen=True)
class OrbitGraph:
    """A radius-limited portion of the Cayley graph of an action.

    points are sorted by the action's canonical key.  edges hold
    (x, i, apply(i, x)) triples for positive generators i with both
    endpoints inside the ball; exterior_edges hold the signed triples
    that leave the ball, so boundary information is never lost.
    """

    action: GroupAction
    center: Any
    radius: int
    points: tuple
    edges: tuple
    exterior_edges: tuple

    def point_set(self) -> frozenset:
        return frozenset(self.points)

    def boundary(self) -> frozenset:
        return frozenset(x for (x, _g, _y) in self.exterior_edges)


def orbit_ball(
    action: GroupAction,
    center: Any,
    radius: int,
    max_points: int = DEFAULT_POINT_BUDGET,
) -> OrbitGraph:
    """Breadth-first ball of the given hop radius around a point.

    Raises BudgetExceededError (with the partial count) if the ball
    grows past max_points before the radius is exhausted.
    """
    if radius < 0:
        raise InputError(f"radius must be nonnegative, got {radius}")
    seen = {center: 0}
    queue = deque([center])
    while queue:
        x = queue.popleft()
        d = seen[x]
        if d == radius:
            continue
        for g in action.generators():
            y = action.apply_fn(g, x)
            if y not in seen:
                seen[y] = d + 1
                if len(seen) > max_points:
                    raise BudgetExceededError(
                        f"orbit ball around {action.encode(center)} exceeded "
                        f"{max_points} points at radius {d + 1}",
                        partial_count=len(seen),
                    )
                queue.append(y)
    ball = frozenset(seen)
    interior = []
    exterior = []
    for x in seen:
        for i in range(1, action.generator_count + 1):
            y = action.apply_fn(i, x)
            if y in ball:
                interior.append((x, i, y))
            else:
                exterior.append((x, i, y))
            z = action.apply_fn(-i, x)
            if z not in ball:
                exterior.append((x, -i, z))
    key = action.sort_key
    points = tuple(sorted(ball, key=key))
    edge_key = lambda t: (key(t[0]), t[1])
    return OrbitGraph(
        action=action,
        center=center,
        radius=radius,
        points=points,
        edges=tuple(sorted(interior, key=edge_key)),
        exterior_edges=tuple(sorted(exterior, key=edge_key)),
    )


def boundary(action: GroupAction, members: Iterable) -> frozenset:
    """Points of the set that some signed generator maps outside it."""
    E = frozenset(members)
    if not E:
        raise InputError("boundary of the empty set is undefined")
    gens = action.generators()
    return frozenset(
        x for x in E if any(action.apply_fn(g, x) not in E for g in gens)
    )


# ---------------------------------------------------------------------------
# built-in families


def _tuple_encode(point: tuple) -> str:
    return ",".join(str(c) for c in point)


def _tuple_decode(text: str) -> tuple:
    if text == "":
        return ()
    return tuple(int(c) for c in text.split(","))


def lattice_action(dimension: int) -> GroupAction:
    """Z^n acting on itself; generator i translates coordinate i by one."""
    if dimension < 1:
        raise InputError(f"lattice dimension must be >= 1, got {dimension}")

    def apply_fn(g: int, x: tuple) -> tuple:
        i = abs(g) - 1
        step = 1 if g > 0 else -1
        return x[:i] + (x[i] + step,) + x[i + 1 :]

    basis = tuple(
        tuple(1 if j == i else 0 for j in range(dimension))
        for i in range(dimension)
    )
    return GroupAction(
        name=f"lattice({dimension})",
        generator_count=dimension,
        origin=(0,) * dimension,
        apply_fn=apply_fn,
        sort_key=lambda x: x,
        encode_fn=_tuple_encode,
        decode_fn=_tuple_decode,
        translation_vectors=basis,
    )


def free_group_action(rank: int) -> GroupAction:
    """The free group on `rank` letters acting on itself by left multiplication.

    Points are reduced words stored as tuples of signed letter ids.
    """
    if rank < 1:
        raise InputError(f"free group rank must be >= 1, got {rank}")

    def apply_fn(g: int, w: tuple) -> tuple:
        if w and w[0] == -g:
            return w[1:]
        return (g,) + w

    return GroupAction(
        name=f"free({rank})",
        generator_count=rank,
        origin=(),
        apply_fn=apply_fn,
        sort_key=lambda w: (len(w), w),
        encode_fn=_tuple_encode,
        decode_fn=_tuple_decode,
    )


def _check_permutation(perm: tuple, degree: int, label: str) -> None:
    if sorted(perm) != list(range(degree)):
        raise InputError(f"{label} is not a permutation of 0..{degree - 1}: {perm!r}")


def finite_permutation_action(perms: Iterable[tuple], degree: int) -> GroupAction:
    """An action on {0..degree-1} generated by explicit permutations."""
    gens = tuple(tuple(p) for p in perms)
    if degree < 1:
        raise InputError(f"degree must be >= 1, got {degree}")
    for k, p in enumerate(gens):
        _check_permutation(p, degree, f"generator {k + 1}")
    inverses = []
    for p in gens:
        inv = [0] * degree
        for i, j in enumerate(p):
            inv[j] = i
        inverses.append(tuple(inv))
    inverses = tuple(inverses)

    def apply_fn(g: int, x: int) -> int:
        if g > 0:
            return gens[g - 1][x]
        return inverses[-g - 1][x]

    return GroupAction(
        name=f"perm(degree={degree},gens={len(gens)})",
        generator_count=len(gens),
        origin=0,
        apply_fn=apply_fn,
        sort_key=lambda x: x,
        encode_fn=str,
        decode_fn=int,
    )


def quotient_action(
    parent: GroupAction,
    project: Callable[[Any], Any],
    section: Callable[[Any], Any],
    name: str,
    sort_key: Callable[[Any], Any] | None = None,
    encode_fn: Callable[[Any], str] | None = None,
    decode_fn: Callable[[str], Any] | None = None,
) -> GroupAction:
    """Push an action through a surjection of point sets.

    project must be equivariant and section must pick a preimage for each
    quotient point; only the origin consistency is checked here, the rest
    is the caller's contract.
    """
    origin = project(parent.origin)
    if project(section(origin)) != origin:
        raise InputError("section is not a right inverse of project at the origin")

    def apply_fn(g: int, y: Any) -> Any:
        return project(parent.apply_fn(g, section(y)))

    return GroupAction(
        name=name,
        generator_count=parent.generator_count,
        origin=origin,
        apply_fn=apply_fn,
        sort_key=sort_key or parent.sort_key,
        encode_fn=encode_fn or parent.encode_fn,
        decode_fn=decode_fn or parent.decode_fn,
    )


def free_quotient_lattice_action(vectors: Iterable[tuple]) -> GroupAction:
    """Coset action of a free group on a lattice.

    Generator k of the free group acts on Z^d by translation with
    vectors[k-1].  Zero vectors are allowed (that generator acts as the
    identity), which is how amenable actions of nonamenable groups are
    built here.
    """
    vecs = tuple(tuple(int(c) for c in v) for v in vectors)
    if not vecs:
        raise InputError("at least one generator vector is required")
    dim = len(vecs[0])
    if dim < 1 or any(len(v) != dim for v in vecs):
        raise InputError(f"generator vectors must share a positive dimension: {vecs!r}")

    def apply_fn(g: int, x: tuple) -> tuple:
        v = vecs[abs(g) - 1]
        step = 1 if g > 0 else -1
        return tuple(c + step * d for c, d in zip(x, v))

    return GroupAction(
        name=f"free_quotient({vecs})",
        generator_count=len(vecs),
        origin=(0,) * dim,
        apply_fn=apply_fn,
        sort_key=lambda x: x,
        encode_fn=_tuple_encode,
        decode_fn=_tuple_decode,
        translation_vectors=vecs,
    )


def word_action(
    carrier: GroupAction,
    words: Iterable[tuple[int, ...]],
    name: str | None = None,
) -> GroupAction:
    """Action whose generators are fixed words in a carrier action.

    Generator k applies words[k-1] (leftmost letter last); its inverse
    applies the reversed, negated word.  An empty word list is allowed
    and yields the action with no generators (every set is invariant).
    Translation vectors are propagated as the net displacement of each
    word when the carrier itself acts by translations.
    """
    word_list = tuple(tuple(w) for w in words)
    for w in word_list:
        for letter in w:
            carrier.check_generator(letter)
    inverses = tuple(tuple(-g for g in reversed(w)) for w in word_list)

    def apply_fn(g: int, x: Any) -> Any:
        w = word_list[g - 1] if g > 0 else inverses[-g - 1]
        for letter in reversed(w):
            x = carrier.apply_fn(letter, x)
        return x

    vectors = None
    if carrier.translation_vectors is not None:
        base_vecs = carrier.translation_vectors
        nets = []
        for w in word_list:
            net = [0] * len(carrier.origin)
            for letter in w:
                v = base_vecs[abs(letter) - 1]
                sign = 1 if letter > 0 else -1
                net = [c + sign * d for c, d in zip(net, v)]
            nets.append(tuple(net))
        vectors = tuple(nets)

    return GroupAction(
        name=name or f"words({len(word_list)} over {carrier.name})",
        generator_count=len(word_list),
        origin=carrier.origin,
        apply_fn=apply_fn,
        sort_key=carrier.sort_key,
        encode_fn=carrier.encode_fn,
        decode_fn=carrier.decode_fn,
        translation_vectors=vectors,
    )


# ---------------------------------------------------------------------------
# coset translation duality for finite permutation groups


def permutation_compose(p: tuple, q: tuple) -> tuple:
    """(p * q)(i) = p(q(i))."""
    return tuple(p[q[i]] for i in range(len(p)))


def permutation_inverse(p: tuple) -> tuple:
    inv = [0] * len(p)
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


def generate_group(generators: Iterable[tuple], max_order: int = MAX_GROUP_ORDER) -> frozenset:
    """Close a set of permutations under composition."""
    gens = [tuple(p) for p in generators]
    if not gens:
        raise InputError("a permutation group needs at least one generator")
    degree = len(gens[0])
    for k, p in enumerate(gens):
        _check_permutation(p, degree, f"generator {k + 1}")
    identity = tuple(range(degree))
    seen = {identity}
    queue = deque([identity])
    while queue:
        x = queue.popleft()
        for p in gens:
            y = permutation_compose(p, x)
            if y not in seen:
                seen.add(y)
                if len(seen) > max_order:
                    raise BudgetExceededError(
                        f"group order exceeds {max_order}", partial_count=len(seen)
                    )
                queue.append(y)
    return frozenset(seen)


@dataclass(frozen=True)
class CosetDualityReport:
    group_order: int
    subgroup_order: int
    left_coset_count: int
    right_coset_count: int
    bijective: bool
    equivariant: bool

    @property
    def ok(self) -> bool:
        return (
            self.bijective
            and self.equivariant
            and self.left_coset_count == self.right_coset_count
            and self.left_coset_count * self.subgroup_order == self.group_order
        )


def coset_duality_check(
    group_generators: Iterable[tuple],
    subgroup_generators: Iterable[tuple],
    max_order: int = MAX_GROUP_ORDER,
) -> CosetDualityReport:
    """Check that inversion swaps the left and right coset translation actions.

    The left action sends a coset sH to (g s)H, the right action sends
    Hs to H(s g^{-1}).  The map sH -> H s^{-1} must be a bijection that
    intertwines the two; this is verified exhaustively.
    """
    G = generate_group(group_generators, max_order=max_order)
    H = generate_group(subgroup_generators, max_order=max_order)
    if not H <= G:
        raise InputError("subgroup generators leave the ambient group")

    left_cosets = {frozenset(permutation_compose(s, h) for h in H) for s in G}
    right_cosets = {frozenset(permutation_compose(h, s) for h in H) for s in G}

    def invert_coset(coset: frozenset) -> frozenset:
        return frozenset(permutation_inverse(x) for x in coset)

    images = {invert_coset(c) for c in left_cosets}
    bijective = images == right_cosets and len(images) == len(left_cosets)

    equivariant = True
    gens = [tuple(p) for p in group_generators]
    for coset in left_cosets:
        rep = next(iter(coset))
        for g in gens:
            moved_left = frozenset(permutation_compose(g, x) for x in coset)
            lhs = invert_coset(moved_left)
            g_inv = permutation_inverse(g)
            rhs = frozenset(
                permutation_compose(x, g_inv) for x in invert_coset(coset)
            )
            if lhs != rhs:
                equivariant = False
                break
        if not equivariant:
            break

    return CosetDualityReport(
        group_order=len(G),
        subgroup_order=len(H),
        left_coset_count=len(left_cosets),
        right_coset_count=len(right_cosets),
        bijective=bijective,
        equivariant=equivariant,
    )


def all_subgroups(group_generators: Iterable[tuple], max_order: int = MAX_GROUP_ORDER) -> list[frozenset]:
    """All subgroups reachable from one or two group elements.

    Every subgroup of the small symmetric groups used in the test-suite is
    generated by at most two elements, so pair closures enumerate them all.
    """
    G = sorted(generate_group(group_generators, max_order=max_order))
    found: set[frozenset] = set()
    for a in G:
        found.add(generate_group([a], max_order=max_order))
    for a, b in itertools.combinations(G, 2):
        found.add(generate_group([a, b], max_order=max_order))
    return sorted(found, key=lambda s: (len(s), sorted(s)))
