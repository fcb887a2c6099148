"""Command line runner: scenario files in, deterministic reports out.

Reports serialize every real as a '.17g' decimal string and every exact
ratio as a numerator/denominator pair, with sorted keys, so identical
(scenario, seed) inputs produce byte-identical files.  Wall-clock timing
goes to stderr only, never into a report.

Exit codes: 0 success, 1 input error, 2 audited inequality violated
(a bug, not a refutation), 3 budget exhausted or search inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from . import __version__
from .errors import (
    BudgetExceededError,
    FolnerVerificationError,
    InequalityViolation,
    InputError,
    NumericalError,
)
from .folner import SearchBudget, folner_boundary_bound, folner_sequence
from .scenario import Scenario, load_scenario
from .spectrum import corollary_check, dirichlet_window, min_eigenvalue
from .transfer import (
    counterexample_check,
    easy_direction_check,
    interval_comparison,
    transfer_negativity,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VIOLATION = 2
EXIT_BUDGET = 3

STATUS_EXIT = {
    "ok": EXIT_OK,
    "violation": EXIT_VIOLATION,
    "budget-exceeded": EXIT_BUDGET,
    "inconclusive": EXIT_BUDGET,
}

# worst first when aggregating a batch
_SEVERITY_ORDER = (EXIT_INPUT, EXIT_VIOLATION, EXIT_BUDGET, EXIT_OK)

BUDGET_ENV = "COVERLAB_BUDGET"


def _num(x: float) -> str:
    return format(float(x), ".17g")


def _jsonable(node: Any) -> Any:
    """Reduce a payload to deterministic JSON-safe primitives."""
    if isinstance(node, bool) or node is None or isinstance(node, (int, str)):
        return node
    if isinstance(node, float):
        return _num(node)
    if isinstance(node, Fraction):
        return {"numerator": node.numerator, "denominator": node.denominator}
    if isinstance(node, dict):
        return {str(k): _jsonable(v) for k, v in node.items()}
    if isinstance(node, (list, tuple)):
        return [_jsonable(v) for v in node]
    raise TypeError(f"cannot serialize {type(node).__name__}")


def _cell(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return _num(x)
    if isinstance(x, Fraction):
        return str(x)
    return str(x)


def render_json(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=1) + "\n"


def render_csv(columns: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(x) for x in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# task handlers: each returns (payload, columns, rows, status, headline)


def _scenario_budget(scn: Scenario, budget_override: Optional[int]) -> SearchBudget:
    budget = scn.params.get("budget", SearchBudget())
    if budget_override is not None:
        budget = replace(budget, max_points=budget_override,
                         max_subsets=budget_override)
    return budget


def _certificate_payload(action, cert) -> dict:
    boundary_size, signed_sum = folner_boundary_bound(action, cert.members)
    return {
        "epsilon": cert.epsilon,
        "size": cert.size,
        "members": [action.encode(x) for x in cert.members],
        "max_ratio": cert.max_ratio,
        "boundary_ratio": cert.boundary_ratio,
        "per_generator_ratios": {str(g): r
                                 for g, r in sorted(cert.per_generator_ratios.items())},
        "boundary_size": boundary_size,
        "signed_exit_sum": signed_sum,
    }


def _run_folner(scn: Scenario, seed: int, budget: SearchBudget):
    action = scn.fiber
    result = folner_sequence(action, scn.params["epsilons"], budget)
    runs = []
    rows = []
    for eps, rep in zip(result.epsilons, result.reports):
        entry = {
            "epsilon": eps,
            "outcome": rep.outcome,
            "sets_examined": rep.sets_examined,
            "radius_reached": rep.radius_reached,
            "best_ratio": rep.best_ratio,
            "certificate": (_certificate_payload(action, rep.certificate)
                            if rep.certificate else None),
        }
        runs.append(entry)
        cert = rep.certificate
        rows.append([
            scn.name, eps, rep.outcome,
            cert.size if cert else None,
            cert.max_ratio if cert else rep.best_ratio,
            cert.boundary_ratio if cert else None,
            rep.sets_examined, rep.radius_reached,
        ])
    payload = {
        "action": action.name,
        "generator_count": action.generator_count,
        "runs": runs,
        "exhausted": result.exhausted,
    }
    columns = ["scenario", "epsilon", "outcome", "set_size", "max_ratio",
               "boundary_ratio", "sets_examined", "radius_reached"]
    status = "inconclusive" if result.exhausted else "ok"
    last = result.reports[-1]
    if result.exhausted:
        headline = f"exhausted at epsilon={result.epsilons[len(result.reports) - 1]}"
        if last.best_ratio is not None:
            headline += f" best_ratio={last.best_ratio}"
    else:
        cert = result.certificates[-1]
        headline = f"size={cert.size} max_ratio={cert.max_ratio}"
    return payload, columns, rows, status, headline


def _window_payload(win) -> dict:
    return {"radius": win.radius, "value": win.value, "size": win.size}


def _run_spectrum(scn: Scenario, seed: int, budget: SearchBudget):
    report = easy_direction_check(
        scn.cover, scn.potential, scn.params["a_samples"], scn.params["radii"],
        seed=seed,
    )
    rows = []
    payload_rows = []
    for row in report.rows:
        payload_rows.append({
            "a": row.a,
            "lambda_min_base": row.lambda_min_base,
            "base_nonnegative": row.base_nonnegative,
            "windows": [_window_payload(w) for w in row.windows],
        })
        for win in row.windows:
            rows.append([scn.name, row.a, row.lambda_min_base,
                         row.base_nonnegative, win.radius, win.value, win.size])
    payload = {"rows": payload_rows}
    columns = ["scenario", "a", "lambda_min_base", "base_nonnegative",
               "radius", "window_value", "window_size"]
    smallest = min((w.value for r in report.rows for w in r.windows), default=None)
    headline = f"min_window={_num(smallest)}" if smallest is not None else "no windows"
    return payload, columns, rows, "ok", headline


def _interval_payload(interval) -> dict:
    return {
        "lower": interval.lower,
        "upper": interval.upper,
        "endpoint_tolerance": interval.endpoint_tolerance,
    }


def _run_interval(scn: Scenario, seed: int, budget: SearchBudget):
    report = interval_comparison(
        scn.cover, scn.potential, scn.params["a_samples"], scn.params["radius"],
        alpha=scn.params.get("alpha"), tol=scn.params.get("tolerance", 1e-6),
        budget=budget, seed=seed,
    )
    rows = []
    payload_rows = []
    for row in report.rows:
        payload_rows.append({
            "a": row.a,
            "lambda_min_base": row.lambda_min_base,
            "base_nonnegative": row.base_nonnegative,
            "window": _window_payload(row.window),
            "cover_refuted": row.cover_refuted,
            "transfer_status": row.transfer_status,
            "collar_ratio": row.collar_ratio,
        })
        rows.append([scn.name, row.a, row.lambda_min_base, row.window.value,
                     row.cover_refuted, row.transfer_status,
                     report.interval.lower, report.interval.upper])
    payload = {
        "interval": _interval_payload(report.interval),
        "rows": payload_rows,
        "inclusion_ok": report.inclusion_ok,
        "equality_evidence": report.equality_evidence,
    }
    columns = ["scenario", "a", "lambda_min_base", "window_value",
               "cover_refuted", "transfer_status", "interval_lower",
               "interval_upper"]
    headline = (f"interval=[{_num(report.interval.lower)}, "
                f"{_num(report.interval.upper)}]")
    return payload, columns, rows, "ok", headline


def _witness_payload(cover, rep) -> dict:
    return {
        "b": rep.b,
        "c": rep.c,
        "alpha": rep.alpha,
        "epsilon_used": rep.epsilon_used,
        "collar_ratio": rep.collar_ratio,
        "collar_ball_bound": rep.collar_ball_bound,
        "members": [cover.carrier.encode(x) for x in rep.members],
        "collar_tiles": [cover.carrier.encode(x) for x in rep.collar_tiles],
        "base_f2": rep.base_f2,
        "base_df2": rep.base_df2,
        "base_Vf2": rep.base_Vf2,
        "base_negVf2": rep.base_negVf2,
        "Q_base": rep.Q_base,
        "Q_cover": rep.Q_cover,
        "term_grad": rep.term_grad,
        "bound_grad": rep.bound_grad,
        "term_pot": rep.term_pot,
        "bound_pot": rep.bound_pot,
        "final_bound": rep.final_bound,
        "verified": rep.verified,
    }


def _run_transfer(scn: Scenario, seed: int, budget: SearchBudget):
    a = scn.params["a"]
    out = transfer_negativity(
        scn.cover, scn.potential, a, scn.params["alpha"], budget,
        max_halvings=scn.params.get("max_halvings", 20), seed=seed,
    )
    window = None
    if "radius" in scn.params:
        window = dirichlet_window(
            scn.cover, scn.cover.carrier.origin, scn.params["radius"],
            scn.potential, a, seed,
        )
    rep = out.report
    payload = {
        "a": a,
        "status": out.status,
        "lambda_min_base": out.lambda_min_base,
        "r_star": out.r_star,
        "alpha": out.alpha,
        "epsilon_first": out.epsilon_first,
        "epsilon_used": out.epsilon_used,
        "best_collar_ratio": out.best_collar_ratio,
        "message": out.message,
        "witness_support": (sorted(scn.cover.encode(p) for p in out.witness.support)
                            if out.witness is not None else None),
        "report": _witness_payload(scn.cover, rep) if rep is not None else None,
        "attempts": [{"epsilon": w.epsilon_used, "b": w.b, "c": w.c}
                     for w in out.attempts],
        "window": _window_payload(window) if window is not None else None,
    }
    columns = ["scenario", "a", "lambda_min_base", "r_star", "epsilon_used",
               "b", "c", "Q_cover", "final_bound", "outcome"]
    rows = [[
        scn.name, a, out.lambda_min_base, out.r_star, out.epsilon_used,
        rep.b if rep else None, rep.c if rep else None,
        rep.Q_cover if rep else None, rep.final_bound if rep else None,
        out.status,
    ]]
    status = "ok" if out.status == "transferred" else "inconclusive"
    if out.status == "transferred":
        headline = f"b/c={rep.collar_ratio} Q_cover={_num(rep.Q_cover)}"
    else:
        headline = (f"inconclusive best_ratio={out.best_collar_ratio}"
                    if out.best_collar_ratio is not None else "inconclusive")
    return payload, columns, rows, status, headline


def _run_counterexample(scn: Scenario, seed: int, budget: SearchBudget):
    a = scn.params["a"]
    report = counterexample_check(
        scn.cover, scn.potential, a, scn.params["alpha"], scn.params["radii"],
        budget=budget, seed=seed,
    )
    out = report.transfer
    payload = {
        "a": a,
        "lambda_min_base": report.lambda_min_base,
        "r_star": report.r_star,
        "alpha": report.alpha,
        "transfer_status": out.status,
        "transfer_message": out.message,
        "best_collar_ratio": out.best_collar_ratio,
        "windows": [_window_payload(w) for w in report.windows],
        "outcome": report.outcome,
    }
    columns = ["scenario", "a", "lambda_min_base", "r_star", "transfer_status",
               "best_ratio", "radius", "window_value", "outcome"]
    rows = [[scn.name, a, report.lambda_min_base, report.r_star, out.status,
             out.best_collar_ratio, w.radius, w.value, report.outcome]
            for w in report.windows]
    headline = f"{report.outcome}; min_window=" + _num(
        min(w.value for w in report.windows))
    return payload, columns, rows, "ok", headline


def _run_corollary(scn: Scenario, seed: int, budget: SearchBudget):
    kwargs = {}
    if "a_samples" in scn.params:
        kwargs["a_samples"] = scn.params["a_samples"]
    report = corollary_check(
        scn.base, scn.potential, tol=scn.params.get("tolerance", 1e-6),
        seed=seed, **kwargs,
    )
    outcome = "full line" if report.zero_potential else "interval pinned to zero"
    payload = {
        "zero_potential": report.zero_potential,
        "interval": _interval_payload(report.interval),
        "rayleigh_constant": [list(row) for row in report.rayleigh_constant],
        "lambda_samples": [list(row) for row in report.lambda_samples],
        "outcome": outcome,
    }
    columns = ["scenario", "a", "rayleigh_constant", "lambda_min",
               "interval_lower", "interval_upper", "endpoint_tolerance"]
    interval = report.interval
    if report.zero_potential:
        rows = [[scn.name, None, None, None, interval.lower, interval.upper,
                 interval.endpoint_tolerance]]
    else:
        rows = [[scn.name, a, rq, lam, interval.lower, interval.upper,
                 interval.endpoint_tolerance]
                for (a, rq), (_a, lam) in zip(report.rayleigh_constant,
                                              report.lambda_samples)]
    headline = (f"interval=[{_num(interval.lower)}, {_num(interval.upper)}]"
                f" ({outcome})")
    return payload, columns, rows, "ok", headline


_HANDLERS = {
    "folner": _run_folner,
    "spectrum": _run_spectrum,
    "interval": _run_interval,
    "transfer": _run_transfer,
    "counterexample": _run_counterexample,
    "corollary": _run_corollary,
}


def _apply_radius(scn: Scenario, radius: Optional[int]) -> None:
    if radius is None:
        return
    if "radius" in scn.params:
        scn.params["radius"] = radius
    if "radii" in scn.params:
        scn.params["radii"] = (radius,)


def execute_scenario(scn: Scenario, seed_override: Optional[int] = None,
                     budget_override: Optional[int] = None,
                     radius_override: Optional[int] = None):
    """Run one scenario; returns (report, columns, rows, status, headline).

    Input errors propagate (nothing trustworthy to report); everything
    else is folded into the report status so batches keep going.
    """
    seed = scn.seed if seed_override is None else seed_override
    budget = _scenario_budget(scn, budget_override)
    _apply_radius(scn, radius_override)
    handler = _HANDLERS[scn.task]
    columns: list[str] = []
    rows: list[list] = []
    try:
        payload, columns, rows, status, headline = handler(scn, seed, budget)
    except (InequalityViolation, FolnerVerificationError, NumericalError) as exc:
        payload = {"error": str(exc)}
        status = "violation"
        headline = str(exc)
    except BudgetExceededError as exc:
        payload = {"error": str(exc)}
        status = "budget-exceeded"
        headline = str(exc)
    report = {
        "version": __version__,
        "scenario": scn.name,
        "task": scn.task,
        "seed": seed,
        "status": status,
        "outcome": payload,
    }
    return report, columns, rows, status, headline


# ---------------------------------------------------------------------------
# commands


def _env_budget() -> Optional[int]:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"{BUDGET_ENV}={raw!r} is not an integer") from None
    if value <= 0:
        raise InputError(f"{BUDGET_ENV} must be positive, got {value}")
    return value


def _cmd_run(args) -> int:
    scn = load_scenario(args.path)
    budget = args.budget if args.budget is not None else _env_budget()
    started = time.perf_counter()
    report, columns, rows, status, headline = execute_scenario(
        scn, args.seed, budget, args.radius,
    )
    elapsed = time.perf_counter() - started
    print(f"[coverlab] {scn.name}: {status} ({headline}) in {elapsed:.3f}s",
          file=sys.stderr)
    if args.format == "csv":
        text = render_csv(columns, rows)
    else:
        text = render_json(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return STATUS_EXIT[status]


def _worst_exit(codes) -> int:
    for code in _SEVERITY_ORDER:
        if code in codes:
            return code
    return EXIT_OK


def _cmd_batch(args) -> int:
    directory = Path(args.dir)
    if not directory.is_dir():
        raise InputError(f"not a directory: {directory}")
    paths = sorted(directory.glob("*.json"))
    if not paths:
        raise InputError(f"no scenario files (*.json) in {directory}")

    scenarios: list[tuple[Path, Scenario]] = []
    seen: dict[str, Path] = {}
    for path in paths:
        scn = load_scenario(path)
        if scn.name in seen:
            raise InputError(
                f"duplicate scenario name '{scn.name}' in {seen[scn.name].name} "
                f"and {path.name}"
            )
        seen[scn.name] = path
        scenarios.append((path, scn))

    budget = args.budget if args.budget is not None else _env_budget()
    out_dir = Path(args.out) if args.out else directory / "_reports"
    out_dir.mkdir(parents=True, exist_ok=True)

    def run_one(item):
        path, scn = item
        started = time.perf_counter()
        try:
            report, _cols, _rows, status, headline = execute_scenario(
                scn, args.seed, budget, args.radius,
            )
        except InputError as exc:
            return scn, None, "input-error", str(exc), 0.0
        elapsed = time.perf_counter() - started
        return scn, report, status, headline, elapsed

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run_one, scenarios))
    else:
        results = [run_one(item) for item in scenarios]

    results.sort(key=lambda item: item[0].name)
    summary_rows = []
    codes = set()
    for scn, report, status, headline, elapsed in results:
        exit_code = EXIT_INPUT if status == "input-error" else STATUS_EXIT[status]
        codes.add(exit_code)
        if report is not None:
            (out_dir / f"{scn.name}.json").write_text(
                render_json(report), encoding="utf-8")
        print(f"[coverlab] {scn.name}: {status} ({headline}) in {elapsed:.3f}s",
              file=sys.stderr)
        summary_rows.append([scn.name, scn.task, status, exit_code, headline])
    summary = render_csv(["scenario", "task", "status", "exit", "detail"],
                         summary_rows)
    (out_dir / "summary.csv").write_text(summary, encoding="utf-8")
    sys.stdout.write(summary)
    return _worst_exit(codes)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coverlab",
        description="Folner certificates, voltage covers, and spectral "
                    "positivity audits from scenario files.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario file")
    run.add_argument("path", help="scenario JSON file")
    run.add_argument("--out", help="write the report here instead of stdout")
    run.add_argument("--format", choices=("json", "csv"), default="json")
    run.add_argument("--seed", type=int, default=None,
                     help="override the scenario seed")
    run.add_argument("--budget", type=int, default=None,
                     help="override max_points and max_subsets")
    run.add_argument("--radius", type=int, default=None,
                     help="replace the scenario radius or radii")

    batch = sub.add_parser("batch", help="run every scenario in a directory")
    batch.add_argument("dir", help="directory of scenario JSON files")
    batch.add_argument("--jobs", type=int, default=1)
    batch.add_argument("--out", help="report directory (default <dir>/_reports)")
    batch.add_argument("--seed", type=int, default=None)
    batch.add_argument("--budget", type=int, default=None)
    batch.add_argument("--radius", type=int, default=None)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_batch(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
