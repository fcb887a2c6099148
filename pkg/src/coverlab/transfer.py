"""Transfer of strict base negativity to a cover through cutoff witnesses.

A base function f with negative energy lifts to the tiles of a Folner
set E and is tapered by a width-alpha cutoff.  The energy of the tapered
lift splits into a bulk proportional to |E| = c and a collar correction
proportional to the number b of tiles the taper touches, so a small
enough collar ratio b/c forces the cover energy negative.  Every step of
that bound is re-audited numerically on the concrete witness; nothing
is trusted from the derivation alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import fsum
from typing import Iterable, Optional, Sequence

from .actions import GroupAction, boundary
from .errors import InequalityViolation, InputError
from .folner import FolnerCertificate, SearchBudget, SearchReport, search_folner
from .geometry import (
    DEFAULT_WINDOW_BUDGET,
    CompactFunction,
    VoltageCover,
    WeightedGraph,
    as_potential,
    base_function,
    cover_form_parts,
    cutoff,
)
from .spectrum import (
    SIGN_FLOOR,
    SpectralResult,
    StabilityInterval,
    WindowValue,
    dirichlet_profile,
    dirichlet_window,
    min_eigenvalue,
    stability_interval,
)

AUDIT_TOLERANCE = 1e-12
REFUTE_FLOOR = -1e-9


def _leq(x: float, y: float) -> bool:
    """x <= y up to mixed absolute and relative slack."""
    return x <= y + AUDIT_TOLERANCE * max(1.0, abs(x), abs(y))


def _boundary_ball(action: GroupAction, members: Sequence, alpha: int) -> int:
    """Size of the radius-alpha ball around the boundary of the member set."""
    frontier = list(boundary(action, members))
    seen = set(frontier)
    for _ in range(alpha):
        nxt = []
        for x in frontier:
            for g in action.generators():
                y = action.apply(g, x)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return len(seen)


@dataclass
class WitnessReport:
    """Audit trail for one tapered lift xi * f.

    c counts member tiles, b counts collar tiles (both sides of the
    taper).  Every term_* is recomputed from the witness function
    itself; every bound_* comes from the base sums alone, so verify()
    confronts the two derivations at each step.
    """

    c: int
    b: int
    alpha: int
    epsilon_used: Optional[Fraction]
    members: tuple
    collar_tiles: tuple
    collar_ball_bound: int
    base_f2: float
    base_df2: float
    base_Vf2: float
    base_negVf2: float
    Q_base: float
    Q_cover: float
    term_grad: float
    bound_grad: float
    term_pot: float
    bound_pot: float
    final_bound: float
    verified: bool = field(default=False)

    @property
    def collar_ratio(self) -> Fraction:
        return Fraction(self.b, self.c)

    def verify(self) -> "WitnessReport":
        """Re-check every inequality in the chain; raise on any breach."""
        if not 0 <= self.b <= self.c:
            raise InequalityViolation(
                f"collar count b={self.b} is outside [0, c={self.c}]"
            )
        if self.b > self.collar_ball_bound:
            raise InequalityViolation(
                f"collar count b={self.b} exceeds the boundary ball bound "
                f"{self.collar_ball_bound}"
            )
        if not _leq(self.term_grad, self.bound_grad):
            raise InequalityViolation(
                f"gradient term {self.term_grad!r} exceeds its bound "
                f"{self.bound_grad!r}"
            )
        if not _leq(self.term_pot, self.bound_pot):
            raise InequalityViolation(
                f"potential term {self.term_pot!r} exceeds its bound "
                f"{self.bound_pot!r}"
            )
        if not _leq(self.Q_cover, self.final_bound):
            raise InequalityViolation(
                f"cover energy {self.Q_cover!r} exceeds the final bound "
                f"{self.final_bound!r}"
            )
        split = self.bound_grad + self.bound_pot
        if abs(self.final_bound - split) > AUDIT_TOLERANCE * max(
            1.0, abs(self.final_bound), abs(split)
        ):
            raise InequalityViolation(
                f"final bound {self.final_bound!r} disagrees with the split "
                f"form {split!r}"
            )
        self.verified = True
        return self


def _base_sums(graph: WeightedGraph, func: CompactFunction, V, a: float):
    pot = as_potential(V, graph)
    support = sorted(func.support)
    s_f2 = fsum(func(v) ** 2 * graph.mu[v] for v in support)
    s_df2 = fsum(w * (func(u) - func(v)) ** 2 for u, v, w in graph.edges)
    s_vf2 = fsum(pot[v] * func(v) ** 2 * graph.mu[v] for v in support)
    s_neg = fsum(max(0.0, -a * pot[v]) * func(v) ** 2 * graph.mu[v] for v in support)
    return s_f2, s_df2, s_vf2, s_neg


def required_ratio(graph: WeightedGraph, f, alpha: int, V, a: float) -> float:
    """Collar ratio below which the tapered lift must go negative.

    r* = -Q_base / (S_f2/alpha^2 + (2/alpha) sqrt(S_df2 S_f2) + S_neg);
    meaningful only when Q_base < 0, and always <= 1 because the bracket
    dominates -Q_base term by term.
    """
    if not isinstance(alpha, int) or alpha < 1:
        raise InputError(f"alpha must be a positive integer, got {alpha!r}")
    func = base_function(f, graph)
    if func.is_zero():
        raise InputError("required ratio needs a nonzero base function")
    s_f2, s_df2, s_vf2, s_neg = _base_sums(graph, func, V, a)
    q_base = s_df2 + a * s_vf2
    if q_base >= 0.0:
        raise InputError(
            f"base energy {q_base!r} is nonnegative; there is no negativity "
            "to transfer"
        )
    bracket = s_f2 / alpha**2 + (2.0 / alpha) * math.sqrt(s_df2 * s_f2) + s_neg
    return -q_base / bracket


def build_witness(cover: VoltageCover, f, folner_set, alpha: int, V, a: float,
                  verify: bool = True) -> tuple[CompactFunction, WitnessReport]:
    """Tapered lift of f over a Folner set, with its full audit report.

    folner_set is a FolnerCertificate or a bare iterable of fiber
    points.  With verify=True (the default on the transfer path) the
    report's inequality chain is checked immediately; verify=False is
    for diagnostic witnesses over sets that never certified, where the
    chain has no reason to hold.
    """
    if isinstance(folner_set, FolnerCertificate):
        members = folner_set.members
        epsilon_used = folner_set.epsilon
    else:
        members = tuple(sorted(set(folner_set), key=cover.carrier.sort_key))
        epsilon_used = None
    func = base_function(f, cover.base)
    if func.is_zero():
        raise InputError("cannot build a witness from the zero function")

    xi = cutoff(cover, members, alpha)
    witness = CompactFunction(
        {p: float(xi(p)) * func(p[0]) for p in sorted(xi.omega, key=cover.sort_key)}
    )
    term_grad, term_pot = cover_form_parts(cover, V, a, witness)
    q_cover = term_grad + term_pot

    s_f2, s_df2, s_vf2, s_neg = _base_sums(cover.base, func, V, a)
    q_base = s_df2 + a * s_vf2
    c = len(members)
    b = len(xi.collar_tiles)
    collar_ball = _boundary_ball(cover.fiber_action, members, alpha)
    bound_grad = (
        (b / alpha**2) * s_f2
        + (2.0 * b / alpha) * math.sqrt(s_f2 * s_df2)
        + c * s_df2
    )
    bound_pot = c * (a * s_vf2) + b * s_neg
    bracket = s_f2 / alpha**2 + (2.0 / alpha) * math.sqrt(s_df2 * s_f2) + s_neg
    final_bound = c * (q_base + (b / c) * bracket)

    report = WitnessReport(
        c=c,
        b=b,
        alpha=alpha,
        epsilon_used=epsilon_used,
        members=members,
        collar_tiles=tuple(sorted(xi.collar_tiles, key=cover.carrier.sort_key)),
        collar_ball_bound=collar_ball,
        base_f2=s_f2,
        base_df2=s_df2,
        base_Vf2=s_vf2,
        base_negVf2=s_neg,
        Q_base=q_base,
        Q_cover=q_cover,
        term_grad=term_grad,
        bound_grad=bound_grad,
        term_pot=term_pot,
        bound_pot=bound_pot,
        final_bound=final_bound,
    )
    if verify:
        report.verify()
    return witness, report


@dataclass(frozen=True)
class TransferOutcome:
    status: str  # "transferred" or "inconclusive"
    lambda_min_base: float
    r_star: float
    alpha: int
    epsilon_first: Fraction
    epsilon_used: Optional[Fraction]
    witness: Optional[CompactFunction]
    report: Optional[WitnessReport]
    attempts: tuple
    best_collar_ratio: Optional[Fraction]
    search_exhausted: Optional[SearchReport]
    message: str


def transfer_negativity(cover: VoltageCover, V, a: float, alpha: int,
                        budget: Optional[SearchBudget] = None,
                        max_halvings: int = 20, seed: int = 0) -> TransferOutcome:
    """Try to push the base ground state's negativity into the cover.

    Starts from epsilon = r* / (1 + n alpha), whose Folner sets obey
    b/c <= collar_ball/c <= n alpha epsilon/(...) comfortably below r*
    in the regular cases, and halves epsilon whenever a certificate's
    collar ratio still lands at or above r*.  Success requires the
    audited witness energy to be strictly negative; anything else on a
    sub-r* ratio is raised as a violation, not smoothed over.
    """
    base = cover.base
    sr = min_eigenvalue(base, V, a, seed=seed)
    if sr.lambda_min >= 0.0:
        raise InputError(
            f"base lambda_min = {sr.lambda_min!r} is nonnegative; nothing to "
            "transfer"
        )
    f = CompactFunction.on_vertices(sr.eigenvector)
    r_star = required_ratio(base, f, alpha, V, a)
    fiber = cover.fiber_action
    epsilon_first = Fraction(r_star) / (1 + fiber.generator_count * alpha)

    attempts: list[WitnessReport] = []
    exhausted: Optional[SearchReport] = None
    eps = epsilon_first
    for _ in range(max_halvings + 1):
        search = search_folner(fiber, eps, budget)
        if search.outcome != "found":
            exhausted = search
            break
        witness, wrep = build_witness(cover, f, search.certificate, alpha, V, a)
        attempts.append(wrep)
        if wrep.collar_ratio < Fraction(r_star):
            if not wrep.Q_cover < 0.0:
                raise InequalityViolation(
                    f"witness with collar ratio {wrep.collar_ratio} below "
                    f"r*={r_star!r} has nonnegative energy {wrep.Q_cover!r}"
                )
            return TransferOutcome(
                status="transferred",
                lambda_min_base=sr.lambda_min,
                r_star=r_star,
                alpha=alpha,
                epsilon_first=epsilon_first,
                epsilon_used=wrep.epsilon_used,
                witness=witness,
                report=wrep,
                attempts=tuple(attempts),
                best_collar_ratio=wrep.collar_ratio,
                search_exhausted=None,
                message=(
                    f"collar ratio {wrep.collar_ratio} < r* = {r_star:.6g}; "
                    f"cover energy {wrep.Q_cover:.6g} < 0"
                ),
            )
        eps = eps / 2

    diagnostic: Optional[WitnessReport] = None
    if not attempts and exhausted is not None and exhausted.best_set:
        _w, diagnostic = build_witness(
            cover, f, exhausted.best_set, alpha, V, a, verify=False
        )
    candidates = [w.collar_ratio for w in attempts]
    if diagnostic is not None:
        candidates.append(diagnostic.collar_ratio)
    best = min(candidates) if candidates else None
    if exhausted is not None:
        detail = "the Folner search exhausted its budget"
    else:
        detail = f"{max_halvings + 1} epsilon halvings never beat r*"
    return TransferOutcome(
        status="inconclusive",
        lambda_min_base=sr.lambda_min,
        r_star=r_star,
        alpha=alpha,
        epsilon_first=epsilon_first,
        epsilon_used=None,
        witness=None,
        report=attempts[-1] if attempts else diagnostic,
        attempts=tuple(attempts),
        best_collar_ratio=best,
        search_exhausted=exhausted,
        message=(
            f"no witness with collar ratio below r* = {r_star:.6g}: {detail}"
            + (f"; best ratio seen {best}" if best is not None else "")
        ),
    )


@dataclass(frozen=True)
class EasyDirectionRow:
    a: float
    lambda_min_base: float
    base_nonnegative: bool
    windows: tuple[WindowValue, ...]


@dataclass(frozen=True)
class EasyDirectionReport:
    rows: tuple[EasyDirectionRow, ...]


def easy_direction_check(cover: VoltageCover, V, a_samples: Sequence[float],
                         radii: Sequence[int], seed: int = 0,
                         max_points: int = DEFAULT_WINDOW_BUDGET) -> EasyDirectionReport:
    """Base nonnegativity must show up in every Dirichlet window.

    Each window value dominates the base bottom eigenvalue, so whenever
    the base operator is nonnegative every window must clear the noise
    floor; a dip below it contradicts the covering inequality and is
    raised as a violation.
    """
    rows = []
    origin = cover.carrier.origin
    for a in a_samples:
        lam = min_eigenvalue(cover.base, V, a, seed=seed).lambda_min
        nonneg = lam >= -SIGN_FLOOR
        windows = dirichlet_profile(cover, origin, radii, V, a, seed, max_points)
        if nonneg:
            for win in windows:
                if win.value < REFUTE_FLOOR:
                    raise InequalityViolation(
                        f"a={a}: base lambda_min={lam!r} is nonnegative but "
                        f"the radius-{win.radius} window is {win.value!r}"
                    )
        rows.append(EasyDirectionRow(float(a), lam, nonneg, windows))
    return EasyDirectionReport(tuple(rows))


@dataclass(frozen=True)
class IntervalSampleRow:
    a: float
    lambda_min_base: float
    base_nonnegative: bool
    window: WindowValue
    cover_refuted: bool
    transfer_status: Optional[str]
    collar_ratio: Optional[Fraction]


@dataclass(frozen=True)
class IntervalComparisonReport:
    interval: StabilityInterval
    rows: tuple[IntervalSampleRow, ...]
    inclusion_ok: bool
    equality_evidence: bool


def interval_comparison(cover: VoltageCover, V, a_samples: Sequence[float],
                        radius: int, alpha: Optional[int] = None,
                        tol: float = 1e-6, budget: Optional[SearchBudget] = None,
                        seed: int = 0,
                        max_points: int = DEFAULT_WINDOW_BUDGET) -> IntervalComparisonReport:
    """Compare the base stability interval against cover evidence.

    For every sampled coupling the base operator is classified by its
    bottom eigenvalue and the cover by one Dirichlet window; nonnegative
    base with a refuted cover is a violation.  When alpha is given and
    the base is strictly negative, a transfer attempt supplies the other
    inclusion; its failure leaves equality_evidence False rather than
    raising, because windows and budgets only ever half-decide it.
    """
    interval = stability_interval(cover.base, V, tol=tol, seed=seed)
    origin = cover.carrier.origin
    rows = []
    inclusion_ok = True
    equality_evidence = True
    for a in a_samples:
        lam = min_eigenvalue(cover.base, V, a, seed=seed).lambda_min
        nonneg = lam >= -SIGN_FLOOR
        window = dirichlet_window(cover, origin, radius, V, a, seed, max_points)
        refuted = window.value < REFUTE_FLOOR
        status = None
        ratio = None
        if nonneg and refuted:
            raise InequalityViolation(
                f"a={a}: base lambda_min={lam!r} is nonnegative but the "
                f"radius-{window.radius} window is {window.value!r}"
            )
        if not nonneg:
            if alpha is not None:
                outcome = transfer_negativity(cover, V, a, alpha, budget, seed=seed)
                status = outcome.status
                ratio = outcome.best_collar_ratio
                if not (refuted or outcome.status == "transferred"):
                    equality_evidence = False
            elif not refuted:
                equality_evidence = False
        rows.append(IntervalSampleRow(
            float(a), lam, nonneg, window, refuted, status, ratio,
        ))
    return IntervalComparisonReport(interval, tuple(rows), inclusion_ok, equality_evidence)


@dataclass(frozen=True)
class CounterexampleReport:
    lambda_min_base: float
    r_star: float
    alpha: int
    transfer: TransferOutcome
    windows: tuple[WindowValue, ...]
    outcome: str


def counterexample_check(cover: VoltageCover, V, a: float, alpha: int,
                         radii: Sequence[int],
                         budget: Optional[SearchBudget] = None, seed: int = 0,
                         max_points: int = DEFAULT_WINDOW_BUDGET) -> CounterexampleReport:
    """Certify strict inclusion: negative base, yet no cover negativity.

    Expects the transfer attempt to come back inconclusive and every
    Dirichlet window to stay above the refutation floor.  A successful
    transfer or a negative window means the scenario is not the strict
    inclusion it claims to be, which is raised as a violation.
    """
    outcome = transfer_negativity(cover, V, a, alpha, budget, seed=seed)
    if outcome.status == "transferred":
        raise InequalityViolation(
            "negativity transferred to the cover; strict inclusion fails"
        )
    windows = dirichlet_profile(cover, cover.carrier.origin, radii, V, a, seed, max_points)
    for win in windows:
        if win.value < REFUTE_FLOOR:
            raise InequalityViolation(
                f"radius-{win.radius} window is {win.value!r} < 0; the cover "
                "is negative after all"
            )
    return CounterexampleReport(
        lambda_min_base=outcome.lambda_min_base,
        r_star=outcome.r_star,
        alpha=alpha,
        transfer=outcome,
        windows=windows,
        outcome="strict inclusion",
    )
