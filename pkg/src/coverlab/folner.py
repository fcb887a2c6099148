"""Folner certificates: exact almost-invariance ratios and their search.

A finite set E is an epsilon-Folner set for an action when every signed
generator gamma satisfies |E symdiff gamma E| <= epsilon * |E|.  All
ratios here are exact fractions; floating point never enters the
verdict.  The searcher tries, in order, a closed-form box (translation
actions only), orbit balls of growing radius, and finally a truncated
enumeration of connected subsets, reporting the best ratio seen when no
certificate exists within budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable

from .actions import GroupAction, boundary, orbit_ball
from .errors import BudgetExceededError, FolnerVerificationError, InputError


def exact_fraction(value) -> Fraction:
    """Coerce a ratio-like value to an exact Fraction.

    Strings are parsed as exact decimals; floats are converted to their
    exact binary value, which keeps comparisons honest either way.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InputError(f"ratio must be finite, got {value!r}")
        return Fraction(value)
    raise InputError(f"cannot interpret {value!r} as an exact ratio")


@dataclass
class SearchBudget:
    """Resource limits for Folner searches."""

    max_points: int = 10**6
    max_radius: int = 12
    subset_size_cap: int = 14
    max_subsets: int = 200_000
    max_box_doublings: int = 20


@dataclass
class FolnerCertificate:
    """A verified finite set with its exact almost-invariance ratios."""

    action: GroupAction = field(repr=False)
    members: tuple
    epsilon: Fraction
    per_generator_ratios: dict[int, Fraction]
    boundary_ratio: Fraction

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def max_ratio(self) -> Fraction:
        return max(self.per_generator_ratios.values(), default=Fraction(0))


def generator_ratio(action: GroupAction, members: frozenset, g: int) -> Fraction:
    """Exact |E symdiff gE| / |E| for one signed generator."""
    if not members:
        raise InputError("ratios of the empty set are undefined")
    # y lies in E intersect gE iff y in E and g^{-1} y in E
    overlap = sum(1 for y in members if action.apply_fn(-g, y) in members)
    return Fraction(2 * (len(members) - overlap), len(members))


def set_ratios(action: GroupAction, members: Iterable) -> dict[int, Fraction]:
    """Exact ratios for every signed generator, computed independently."""
    E = frozenset(members)
    return {g: generator_ratio(action, E, g) for g in action.generators()}


def verify_certificate(action: GroupAction, members: Iterable, epsilon) -> FolnerCertificate:
    """Check the Folner condition exactly, or raise on the worst violation."""
    eps = exact_fraction(epsilon)
    E = frozenset(members)
    if not E:
        raise InputError("a Folner set must be nonempty")
    ratios = set_ratios(action, E)
    for g in action.generators():
        if ratios[g] > eps:
            raise FolnerVerificationError(g, ratios[g], eps)
    bdry = boundary(action, E)
    return FolnerCertificate(
        action=action,
        members=tuple(sorted(E, key=action.sort_key)),
        epsilon=eps,
        per_generator_ratios=ratios,
        boundary_ratio=Fraction(len(bdry), len(E)),
    )


def folner_boundary_bound(action: GroupAction, members: Iterable) -> tuple[int, int]:
    """Boundary size versus the summed one-sided deficits that bound it.

    Returns (|dE|, sum over signed g of |E \\ g^{-1}E|); the first never
    exceeds the second, since each boundary point is counted by at least
    one generator that moves it out.
    """
    E = frozenset(members)
    if not E:
        raise InputError("boundary bound of the empty set is undefined")
    lhs = len(boundary(action, E))
    rhs = 0
    for g in action.generators():
        rhs += sum(1 for x in E if action.apply_fn(g, x) not in E)
    return lhs, rhs


@dataclass
class SearchReport:
    outcome: str  # "found" or "exhausted"
    certificate: FolnerCertificate | None
    best_ratio: Fraction | None
    best_set: tuple | None
    sets_examined: int
    radius_reached: int


# ---------------------------------------------------------------------------
# strategy 1: boxes for translation actions


def _translate(point: tuple, vector: tuple[int, ...], times: int = 1) -> tuple:
    return tuple(c + times * d for c, d in zip(point, vector))


def translation_box(action: GroupAction, side: int,
                    max_points: int | None = None) -> frozenset:
    """Image of the coordinate box [0, side)^n under the translation map.

    Built incrementally one generator direction at a time so degenerate
    vector families (repeated or zero vectors) cost only the size of the
    true image, never side**n.  Aborts with BudgetExceededError as soon
    as the partial image outgrows max_points.
    """
    if action.translation_vectors is None:
        raise InputError(f"{action.name} is not a translation action")
    if side < 1:
        raise InputError(f"box side must be >= 1, got {side}")
    points: set = {action.origin}
    for vector in action.translation_vectors:
        if all(c == 0 for c in vector):
            continue
        layer = set(points)
        acc = set(points)
        for _ in range(side - 1):
            layer = {_translate(x, vector) for x in layer}
            acc |= layer
            if max_points is not None and len(acc) > max_points:
                raise BudgetExceededError(
                    f"translation box of side {side} exceeds {max_points} points",
                    partial_count=len(acc),
                )
        points = acc
    return frozenset(points)


def _search_box(action: GroupAction, eps: Fraction, budget: SearchBudget) -> FolnerCertificate | None:
    n = action.generator_count
    side = max(1, math.ceil(Fraction(2 * n, 1) / eps)) if eps > 0 else None
    if side is None:
        return None
    for _ in range(budget.max_box_doublings):
        try:
            box = translation_box(action, side, budget.max_points)
        except BudgetExceededError:
            return None
        try:
            return verify_certificate(action, box, eps)
        except FolnerVerificationError:
            side *= 2
    return None


# ---------------------------------------------------------------------------
# strategy 3: truncated enumeration of connected subsets


def _connected_subsets(action: GroupAction, root, size_cap: int, max_subsets: int):
    """Yield connected subsets of the Cayley graph containing the root.

    Each qualifying subset is produced exactly once (standard extension
    scheme with a forbidden set); enumeration stops after max_subsets.
    """
    gens = action.generators()
    key = action.sort_key

    def neighbors(x):
        return sorted({action.apply_fn(g, x) for g in gens} - {x}, key=key)

    emitted = 0

    def extend(current: frozenset, frontier: tuple, forbidden: frozenset):
        nonlocal emitted
        if emitted >= max_subsets:
            return
        emitted += 1
        yield current
        if len(current) >= size_cap:
            return
        banned = set(forbidden)
        for i, v in enumerate(frontier):
            rest = frontier[i + 1 :]
            fresh = tuple(
                u
                for u in neighbors(v)
                if u not in current and u not in banned and u not in rest
            )
            yield from extend(current | {v}, rest + fresh, frozenset(banned))
            banned.add(v)

    yield from extend(frozenset([root]), tuple(neighbors(root)), frozenset())


def search_folner(
    action: GroupAction,
    epsilon,
    budget: SearchBudget | None = None,
) -> SearchReport:
    """Look for an epsilon-Folner set around the action's origin.

    Outcome "found" carries a verified certificate.  Outcome "exhausted"
    carries the best (smallest) maximal ratio among all sets examined,
    which for nonamenable actions stays bounded away from zero.
    """
    eps = exact_fraction(epsilon)
    if eps < 0:
        raise InputError(f"epsilon must be nonnegative, got {eps}")
    budget = budget or SearchBudget()

    examined = 0
    best_ratio: Fraction | None = None
    best_set: tuple | None = None

    if action.generator_count == 0:
        # every set is invariant under the empty generating system
        cert = verify_certificate(action, [action.origin], eps)
        return SearchReport("found", cert, Fraction(0), cert.members, 1, 0)

    if action.translation_vectors is not None:
        cert = _search_box(action, eps, budget)
        if cert is not None:
            return SearchReport(
                outcome="found",
                certificate=cert,
                best_ratio=cert.max_ratio,
                best_set=cert.members,
                sets_examined=1,
                radius_reached=0,
            )

    def consider(members: frozenset) -> FolnerCertificate | None:
        nonlocal examined, best_ratio, best_set
        examined += 1
        ratios = set_ratios(action, members)
        worst = max(ratios.values())
        if best_ratio is None or worst < best_ratio:
            best_ratio = worst
            best_set = tuple(sorted(members, key=action.sort_key))
        if worst <= eps:
            return verify_certificate(action, members, eps)
        return None

    radius_reached = 0
    for radius in range(budget.max_radius + 1):
        try:
            ball = orbit_ball(action, action.origin, radius, max_points=budget.max_points)
        except BudgetExceededError:
            break
        radius_reached = radius
        cert = consider(ball.point_set())
        if cert is not None:
            return SearchReport("found", cert, cert.max_ratio, cert.members, examined, radius_reached)
        if len(ball.points) >= budget.max_points:
            break

    for subset in _connected_subsets(
        action, action.origin, budget.subset_size_cap, budget.max_subsets
    ):
        cert = consider(subset)
        if cert is not None:
            return SearchReport("found", cert, cert.max_ratio, cert.members, examined, radius_reached)

    return SearchReport("exhausted", None, best_ratio, best_set, examined, radius_reached)


@dataclass
class FolnerSequenceResult:
    epsilons: tuple[Fraction, ...]
    certificates: tuple[FolnerCertificate, ...]
    reports: tuple[SearchReport, ...]
    exhausted: bool


def folner_sequence(
    action: GroupAction,
    epsilons: Iterable,
    budget: SearchBudget | None = None,
) -> FolnerSequenceResult:
    """Search one certificate per requested ratio, stopping at the first miss."""
    eps_list = tuple(exact_fraction(e) for e in epsilons)
    if not eps_list:
        raise InputError("at least one epsilon is required")
    reports = []
    certificates = []
    exhausted = False
    for eps in eps_list:
        report = search_folner(action, eps, budget)
        reports.append(report)
        if report.outcome == "found":
            certificates.append(report.certificate)
        else:
            exhausted = True
            break
    return FolnerSequenceResult(
        epsilons=eps_list,
        certificates=tuple(certificates),
        reports=tuple(reports),
        exhausted=exhausted,
    )
