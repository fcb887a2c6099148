"""Scenario files: a strict JSON dialect with decimal-string reals.

Every real number in a scenario is a decimal string ("0.05", "-1e-3"),
never a bare JSON float, so files re-parse bit-exactly and reports stay
byte-identical across runs.  Integers (vertex ids, radii, alpha, seeds)
are plain JSON integers.  Validation errors name the offending field by
path.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from .actions import (
    GroupAction,
    finite_permutation_action,
    free_group_action,
    free_quotient_lattice_action,
    lattice_action,
)
from .errors import InputError
from .folner import SearchBudget, exact_fraction
from .geometry import VoltageCover, WeightedGraph, build_cover

TASKS = ("folner", "spectrum", "interval", "transfer", "counterexample", "corollary")

_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_.-]*$")


class _RawFloat:
    """Marker for a bare JSON float, which the schema forbids."""

    __slots__ = ("text",)

    def __init__(self, text: str):
        self.text = text


def _reject_raw_floats(node: Any, path: str) -> None:
    if isinstance(node, _RawFloat):
        raise InputError(
            f"{path}: real numbers must be decimal strings, got bare {node.text}"
        )
    if isinstance(node, dict):
        for key, value in node.items():
            _reject_raw_floats(value, f"{path}.{key}")
    elif isinstance(node, list):
        for i, value in enumerate(node):
            _reject_raw_floats(value, f"{path}[{i}]")


def _expect_dict(node: Any, path: str) -> dict:
    if not isinstance(node, dict):
        raise InputError(f"{path}: expected an object, got {type(node).__name__}")
    return node


def _expect_list(node: Any, path: str) -> list:
    if not isinstance(node, list):
        raise InputError(f"{path}: expected a list, got {type(node).__name__}")
    return node


def _expect_int(node: Any, path: str) -> int:
    if isinstance(node, bool) or not isinstance(node, int):
        raise InputError(f"{path}: expected an integer, got {node!r}")
    return node


def _expect_bool(node: Any, path: str) -> bool:
    if not isinstance(node, bool):
        raise InputError(f"{path}: expected true or false, got {node!r}")
    return node


def _expect_real(node: Any, path: str) -> float:
    if isinstance(node, bool) or isinstance(node, int):
        raise InputError(
            f"{path}: reals must be decimal strings like \"{node}\", got {node!r}"
        )
    if not isinstance(node, str):
        raise InputError(f"{path}: expected a decimal string, got {node!r}")
    try:
        return float(node)
    except ValueError:
        raise InputError(f"{path}: {node!r} is not a decimal number") from None


def _expect_fraction(node: Any, path: str) -> Fraction:
    _expect_real(node, path)
    try:
        return exact_fraction(node)
    except (InputError, ValueError):
        raise InputError(f"{path}: {node!r} is not an exact decimal") from None


def _check_keys(node: dict, path: str, required: tuple, optional: tuple) -> None:
    for key in required:
        if key not in node:
            raise InputError(f"{path}: missing required field '{key}'")
    allowed = set(required) | set(optional)
    for key in node:
        if key not in allowed:
            raise InputError(f"{path}: unknown field '{key}'")


def _parse_base(node: Any, path: str) -> WeightedGraph:
    obj = _expect_dict(node, path)
    _check_keys(obj, path, ("mu", "edges"), ())
    mu = [_expect_real(x, f"{path}.mu[{i}]")
          for i, x in enumerate(_expect_list(obj["mu"], f"{path}.mu"))]
    edges = []
    for i, row in enumerate(_expect_list(obj["edges"], f"{path}.edges")):
        item = _expect_list(row, f"{path}.edges[{i}]")
        if len(item) != 3:
            raise InputError(f"{path}.edges[{i}]: expected [u, v, weight]")
        u = _expect_int(item[0], f"{path}.edges[{i}][0]")
        v = _expect_int(item[1], f"{path}.edges[{i}][1]")
        w = _expect_real(item[2], f"{path}.edges[{i}][2]")
        edges.append((u, v, w))
    try:
        return WeightedGraph(mu, edges)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


def _parse_fiber(node: Any, path: str) -> GroupAction:
    obj = _expect_dict(node, path)
    kind = obj.get("kind")
    if kind == "lattice":
        _check_keys(obj, path, ("kind", "dimension"), ())
        return lattice_action(_expect_int(obj["dimension"], f"{path}.dimension"))
    if kind == "free_group":
        _check_keys(obj, path, ("kind", "rank"), ())
        return free_group_action(_expect_int(obj["rank"], f"{path}.rank"))
    if kind == "finite_permutation":
        _check_keys(obj, path, ("kind", "degree", "generators"), ())
        degree = _expect_int(obj["degree"], f"{path}.degree")
        perms = []
        for i, row in enumerate(_expect_list(obj["generators"], f"{path}.generators")):
            perm = [_expect_int(x, f"{path}.generators[{i}][{j}]")
                    for j, x in enumerate(_expect_list(row, f"{path}.generators[{i}]"))]
            perms.append(tuple(perm))
        try:
            return finite_permutation_action(perms, degree)
        except InputError as exc:
            raise InputError(f"{path}: {exc}") from None
    if kind == "quotient":
        _check_keys(obj, path, ("kind", "vectors"), ())
        vectors = []
        for i, row in enumerate(_expect_list(obj["vectors"], f"{path}.vectors")):
            vec = [_expect_int(x, f"{path}.vectors[{i}][{j}]")
                   for j, x in enumerate(_expect_list(row, f"{path}.vectors[{i}]"))]
            vectors.append(tuple(vec))
        try:
            return free_quotient_lattice_action(vectors)
        except InputError as exc:
            raise InputError(f"{path}: {exc}") from None
    raise InputError(
        f"{path}.kind: expected one of lattice, free_group, finite_permutation, "
        f"quotient; got {kind!r}"
    )


def _parse_voltages(node: Any, path: str) -> dict:
    voltages = {}
    for i, row in enumerate(_expect_list(node, path)):
        item = _expect_list(row, f"{path}[{i}]")
        if len(item) != 3:
            raise InputError(f"{path}[{i}]: expected [u, v, word]")
        u = _expect_int(item[0], f"{path}[{i}][0]")
        v = _expect_int(item[1], f"{path}[{i}][1]")
        word = tuple(
            _expect_int(x, f"{path}[{i}][2][{j}]")
            for j, x in enumerate(_expect_list(item[2], f"{path}[{i}][2]"))
        )
        if (u, v) in voltages:
            raise InputError(f"{path}[{i}]: duplicate voltage for edge ({u}, {v})")
        voltages[(u, v)] = word
    return voltages


def _parse_budget(node: Any, path: str) -> SearchBudget:
    obj = _expect_dict(node, path)
    _check_keys(obj, path, (), (
        "max_points", "max_radius", "subset_size_cap", "max_subsets",
        "max_box_doublings",
    ))
    kwargs = {key: _expect_int(obj[key], f"{path}.{key}") for key in obj}
    return SearchBudget(**kwargs)


def _real_list(node: Any, path: str) -> tuple[float, ...]:
    items = _expect_list(node, path)
    if not items:
        raise InputError(f"{path}: list must be nonempty")
    return tuple(_expect_real(x, f"{path}[{i}]") for i, x in enumerate(items))


def _int_list(node: Any, path: str) -> tuple[int, ...]:
    items = _expect_list(node, path)
    if not items:
        raise InputError(f"{path}: list must be nonempty")
    return tuple(_expect_int(x, f"{path}[{i}]") for i, x in enumerate(items))


_PARAM_FIELDS = {
    "folner": ((), ("epsilon", "epsilons", "budget")),
    "spectrum": (("a_samples", "radii"), ()),
    "interval": (("a_samples", "radius"), ("alpha", "tolerance", "budget")),
    "transfer": (("a", "alpha"), ("radius", "budget", "max_halvings")),
    "counterexample": (("a", "alpha", "radii"), ("budget",)),
    "corollary": ((), ("a_samples", "tolerance")),
}


def _parse_params(task: str, node: Any, path: str) -> dict:
    obj = _expect_dict(node, path) if node is not None else {}
    required, optional = _PARAM_FIELDS[task]
    _check_keys(obj, path, required, optional)
    out: dict[str, Any] = {}
    if task == "folner":
        if ("epsilon" in obj) == ("epsilons" in obj):
            raise InputError(f"{path}: give exactly one of 'epsilon' or 'epsilons'")
        if "epsilon" in obj:
            out["epsilons"] = (_expect_fraction(obj["epsilon"], f"{path}.epsilon"),)
        else:
            items = _expect_list(obj["epsilons"], f"{path}.epsilons")
            if not items:
                raise InputError(f"{path}.epsilons: list must be nonempty")
            out["epsilons"] = tuple(
                _expect_fraction(x, f"{path}.epsilons[{i}]")
                for i, x in enumerate(items)
            )
    if task == "spectrum":
        out["a_samples"] = _real_list(obj["a_samples"], f"{path}.a_samples")
        out["radii"] = _int_list(obj["radii"], f"{path}.radii")
    if task == "interval":
        out["a_samples"] = _real_list(obj["a_samples"], f"{path}.a_samples")
        out["radius"] = _expect_int(obj["radius"], f"{path}.radius")
        if "alpha" in obj:
            out["alpha"] = _expect_int(obj["alpha"], f"{path}.alpha")
    if task == "transfer":
        out["a"] = _expect_real(obj["a"], f"{path}.a")
        out["alpha"] = _expect_int(obj["alpha"], f"{path}.alpha")
        if "radius" in obj:
            out["radius"] = _expect_int(obj["radius"], f"{path}.radius")
        if "max_halvings" in obj:
            out["max_halvings"] = _expect_int(obj["max_halvings"], f"{path}.max_halvings")
    if task == "counterexample":
        out["a"] = _expect_real(obj["a"], f"{path}.a")
        out["alpha"] = _expect_int(obj["alpha"], f"{path}.alpha")
        out["radii"] = _int_list(obj["radii"], f"{path}.radii")
    if task == "corollary":
        if "a_samples" in obj:
            out["a_samples"] = _real_list(obj["a_samples"], f"{path}.a_samples")
    if "tolerance" in obj:
        out["tolerance"] = _expect_real(obj["tolerance"], f"{path}.tolerance")
    if "budget" in obj:
        out["budget"] = _parse_budget(obj["budget"], f"{path}.budget")
    return out


@dataclass
class Scenario:
    name: str
    task: str
    seed: int
    base: Optional[WeightedGraph]
    potential: Optional[tuple[float, ...]]
    fiber: Optional[GroupAction]
    cover: Optional[VoltageCover]
    params: dict
    source: str


_NEEDS_COVER = ("spectrum", "interval", "transfer", "counterexample")


def parse_scenario(obj: Any, source: str = "<memory>") -> Scenario:
    root = _expect_dict(obj, "scenario")
    _reject_raw_floats(root, "scenario")
    _check_keys(root, "scenario", ("name", "task"),
                ("seed", "base", "potential", "fiber", "voltages", "params"))
    name = root["name"]
    if not isinstance(name, str) or not _NAME_RE.match(name):
        raise InputError(f"scenario.name: {name!r} is not a valid identifier")
    task = root["task"]
    if task not in TASKS:
        raise InputError(f"scenario.task: {task!r} is not one of {', '.join(TASKS)}")
    seed = _expect_int(root.get("seed", 0), "scenario.seed")
    if seed < 0:
        raise InputError(f"scenario.seed: must be nonnegative, got {seed}")

    base = potential = fiber = cover = None
    if task == "folner":
        for key in ("base", "potential", "voltages"):
            if key in root:
                raise InputError(f"scenario.{key}: not used by the folner task")
        if "fiber" not in root:
            raise InputError("scenario.fiber: required for the folner task")
        fiber = _parse_fiber(root["fiber"], "scenario.fiber")
    elif task == "corollary":
        for key in ("fiber", "voltages"):
            if key in root:
                raise InputError(f"scenario.{key}: not used by the corollary task")
        if "base" not in root:
            raise InputError("scenario.base: required for the corollary task")
        if "potential" not in root:
            raise InputError("scenario.potential: required for the corollary task")
        base = _parse_base(root["base"], "scenario.base")
        potential = _real_list(root["potential"], "scenario.potential")
    else:
        for key in ("base", "potential", "fiber", "voltages"):
            if key not in root:
                raise InputError(f"scenario.{key}: required for the {task} task")
        base = _parse_base(root["base"], "scenario.base")
        potential = _real_list(root["potential"], "scenario.potential")
        fiber = _parse_fiber(root["fiber"], "scenario.fiber")
        voltages = _parse_voltages(root["voltages"], "scenario.voltages")
        try:
            cover = build_cover(base, fiber, voltages)
        except InputError as exc:
            raise InputError(f"scenario.voltages: {exc}") from None

    if potential is not None and base is not None and len(potential) != base.vertex_count:
        raise InputError(
            f"scenario.potential: length {len(potential)} does not match the "
            f"{base.vertex_count}-vertex base"
        )
    params = _parse_params(task, root.get("params"), "scenario.params")
    return Scenario(
        name=name, task=task, seed=seed, base=base, potential=potential,
        fiber=fiber, cover=cover, params=params, source=source,
    )


def load_scenario(path) -> Scenario:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"scenario file not found: {p}")
    text = p.read_text(encoding="utf-8")
    try:
        obj = json.loads(text, parse_float=lambda s: _RawFloat(s))
    except json.JSONDecodeError as exc:
        raise InputError(f"{p}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return parse_scenario(obj, source=str(p))
    except InputError as exc:
        raise InputError(f"{p}: {exc}") from None
