"""``lhvlab run``: decide locality or steerability for a JSON scene file.

Scene layout (``"schema": 1``)::

    {
      "schema": 1,
      "task": "bell" | "steer-ab" | "steer-ba" | "criterion" | "construct-measurements",
      "state": {...},
      "alice_assemblage": [povm, ...],
      "bob_assemblage": [povm, ...],
      "params": {"dist_tol": 1e-6, ...}
    }

A state is ``{"factory": "maximally_entangled", "n": 2}``,
``{"factory": "pure_from_schmidt", "mu": [...], "basis_a": U, "basis_b": V}``,
``{"factory": "product_state", "rho_a": A, "rho_b": B}``,
``{"factory": "random_pure" | "random_density", "dims": [dA, dB]}`` (seeded),
``{"matrix": M, "dims": [dA, dB]}`` or ``{"vector": v, "dims": [dA, dB]}``.
A POVM is ``{"effects": [E_0, ...]}`` or ``{"basis": "computational" |
"fourier" | "unitary", "unitary": U}``, optionally with ``"conjugate_by": W``
to rotate every effect to ``W E W^dagger``.  Complex entries are written
``[re, im]``; plain numbers are read as real.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from . import __version__
from .bell import FEAS_TOL, decide_bell_local
from .errors import (
    CapacityError,
    ConvergenceError,
    DimensionError,
    DomainError,
    IndeterminateError,
    LhvLabError,
    SolverError,
)
from .quantum import (
    Basis,
    DensityMatrix,
    MeasurementAssemblage,
    Povm,
    assemblage_of,
    correlations_of,
    fourier_basis,
    maximally_entangled,
    product_state,
    pure_from_schmidt,
    random_density,
    random_pure,
    swap_parties,
)
from .steering import (
    DIST_TOL,
    GAP_TOL,
    MAX_ITERS,
    criterion_disjoint_bases,
    decide_unsteerable,
    steering_measurements_for_pure,
)
from .strategies import DEFAULT_CAP, enumerate_strategies

SCHEMA = 1
TASKS = ("bell", "steer-ab", "steer-ba", "criterion", "construct-measurements")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INDETERMINATE = 4
EXIT_CAPACITY = 5
EXIT_CODES = {"Local": 10, "Nonlocal": 11, "Unsteerable": 20, "Steerable": 21}


# -- scene parsing -----------------------------------------------------------


class SceneError(Exception):
    """Invalid scene; ``line`` points at the offending entry when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message)
        self.line = line


def _skip_ws(text: str, pos: int) -> int:
    while pos < len(text) and text[pos] in " \t\r\n":
        pos += 1
    return pos


def _element_start(text: str, pos: int, index: int) -> int:
    """Offset of element ``index`` of the JSON array whose ``[`` is at or after ``pos``."""
    pos = text.find("[", pos)
    if pos < 0:
        return -1
    pos = _skip_ws(text, pos + 1)
    if index == 0:
        return pos if pos < len(text) and text[pos] != "]" else -1
    count = 0
    depth = 0
    in_string = False
    while pos < len(text):
        ch = text[pos]
        if in_string:
            if ch == "\\":
                pos += 1
            elif ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
        elif ch in "[{":
            depth += 1
        elif ch in "]}":
            if depth == 0:
                return -1
            depth -= 1
        elif ch == "," and depth == 0:
            count += 1
            pos = _skip_ws(text, pos + 1)
            if count == index:
                return pos
            continue
        pos += 1
    return -1


def _locate(text: str, path: tuple) -> Optional[int]:
    """Best-effort line number of the value at ``path`` in the raw JSON text.

    String keys are followed in order through the text; integer indices
    step through the elements of the array that follows.
    """
    pos = 0
    found = False
    for key in path:
        if isinstance(key, str):
            hit = text.find(json.dumps(key), pos)
        else:
            hit = _element_start(text, pos, key)
        if hit < 0:
            break
        pos = hit
        found = True
    return text.count("\n", 0, pos) + 1 if found else None


@dataclass
class _Reader:
    text: str
    path: tuple = ()

    def fail(self, message: str, path: tuple | None = None) -> SceneError:
        where = self.path if path is None else path
        label = "/".join(str(p) for p in where) or "<root>"
        return SceneError(f"{label}: {message}", _locate(self.text, where))


def _matrix(value, reader: _Reader, path: tuple, square: bool = True) -> np.ndarray:
    arr = _parse_numeric(value, reader, path, ndim=2)
    if square and arr.shape[0] != arr.shape[1]:
        raise reader.fail(f"matrix must be square, got {arr.shape}", path)
    return arr


def _parse_numeric(value, reader: _Reader, path: tuple, ndim: int) -> np.ndarray:
    """Read an ``ndim``-dimensional complex array.

    A trailing axis of length 2 beyond ``ndim`` is read as ``[re, im]``
    pairs; otherwise entries are real.
    """
    try:
        raw = np.array(value, dtype=float)
    except (ValueError, TypeError):
        raise reader.fail("expected a rectangular numeric array", path) from None
    if raw.ndim == ndim + 1 and raw.shape[-1] == 2:
        arr = raw[..., 0] + 1j * raw[..., 1]
    elif raw.ndim == ndim:
        arr = raw.astype(complex)
    else:
        raise reader.fail(
            f"expected {ndim}-dimensional entries (optionally [re, im] pairs), got shape {raw.shape}",
            path,
        )
    if not np.all(np.isfinite(arr)):
        raise reader.fail("non-finite entry", path)
    return arr


def _int(obj: dict, key: str, reader: _Reader, path: tuple, minimum: int = 1) -> int:
    if key not in obj:
        raise reader.fail(f"missing {key!r}", path)
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise reader.fail(f"{key!r} must be an integer >= {minimum}", path + (key,))
    return v


def _dims(obj: dict, reader: _Reader, path: tuple) -> tuple[int, int]:
    d = obj.get("dims")
    if (
        not isinstance(d, list)
        or len(d) != 2
        or any(isinstance(t, bool) or not isinstance(t, int) or t < 1 for t in d)
    ):
        raise reader.fail("'dims' must be [d_A, d_B] with positive integers", path + ("dims",))
    return d[0], d[1]


@dataclass
class Scene:
    task: str
    state: DensityMatrix
    dims: tuple[int, int]
    alice: Optional[MeasurementAssemblage]
    bob: Optional[MeasurementAssemblage]
    params: dict = field(default_factory=dict)


def _parse_state(obj, reader: _Reader, rng: np.random.Generator):
    path = ("state",)
    if not isinstance(obj, dict):
        raise reader.fail("state must be an object", path)
    try:
        if "factory" in obj:
            name = obj["factory"]
            if name == "maximally_entangled":
                n = _int(obj, "n", reader, path, minimum=2)
                return maximally_entangled(n), (n, n)
            if name == "pure_from_schmidt":
                mu = np.asarray(obj.get("mu"), dtype=float)
                if mu.ndim != 1:
                    raise reader.fail("'mu' must be a list of numbers", path + ("mu",))
                ba = Basis(_matrix(obj["basis_a"], reader, path + ("basis_a",)))
                bb = Basis(_matrix(obj["basis_b"], reader, path + ("basis_b",)))
                return pure_from_schmidt(mu, ba, bb), (ba.dim, bb.dim)
            if name == "product_state":
                a = _matrix(obj["rho_a"], reader, path + ("rho_a",))
                b = _matrix(obj["rho_b"], reader, path + ("rho_b",))
                return product_state(a, b), (a.shape[0], b.shape[0])
            if name in ("random_pure", "random_density"):
                da, db = _dims(obj, reader, path)
                if name == "random_pure":
                    return DensityMatrix.from_vector(random_pure(da * db, rng)), (da, db)
                return random_density(da * db, rng), (da, db)
            raise reader.fail(f"unknown state factory {name!r}", path + ("factory",))
        if "matrix" in obj:
            da, db = _dims(obj, reader, path)
            m = _matrix(obj["matrix"], reader, path + ("matrix",))
            if m.shape[0] != da * db:
                raise reader.fail(f"matrix is {m.shape[0]}x{m.shape[0]} but dims give {da * db}", path + ("dims",))
            return DensityMatrix(m), (da, db)
        if "vector" in obj:
            da, db = _dims(obj, reader, path)
            v = _parse_numeric(obj["vector"], reader, path + ("vector",), ndim=1)
            if v.shape[0] != da * db:
                raise reader.fail(f"vector has length {v.shape[0]} but dims give {da * db}", path + ("dims",))
            return DensityMatrix.from_vector(v), (da, db)
    except KeyError as exc:
        raise reader.fail(f"missing {exc.args[0]!r}", path) from None
    except LhvLabError as exc:
        raise reader.fail(str(exc), path) from None
    raise reader.fail("state needs 'factory', 'matrix' or 'vector'", path)


def _parse_povm(obj, dim: int, reader: _Reader, path: tuple) -> Povm:
    if not isinstance(obj, dict):
        raise reader.fail("POVM must be an object", path)
    try:
        if "effects" in obj:
            effects = _parse_numeric(obj["effects"], reader, path + ("effects",), ndim=3)
            povm = Povm(effects)
        elif "basis" in obj:
            kind = obj["basis"]
            if kind == "computational":
                povm = Povm.from_basis(Basis.computational(dim))
            elif kind == "fourier":
                povm = Povm.from_basis(fourier_basis(dim))
            elif kind == "unitary":
                if "unitary" not in obj:
                    raise reader.fail("basis 'unitary' needs a 'unitary' matrix", path)
                povm = Povm.from_basis(Basis(_matrix(obj["unitary"], reader, path + ("unitary",))))
            else:
                raise reader.fail(f"unknown basis {kind!r}", path + ("basis",))
        else:
            raise reader.fail("POVM needs 'effects' or 'basis'", path)
        if "conjugate_by" in obj:
            w = Basis(_matrix(obj["conjugate_by"], reader, path + ("conjugate_by",))).columns
            e = w @ povm.effects @ w.conj().T
            povm = Povm(0.5 * (e + np.conj(np.swapaxes(e, -1, -2))))
    except LhvLabError as exc:
        raise reader.fail(str(exc), path) from None
    if povm.dim != dim:
        raise reader.fail(f"POVM acts on dimension {povm.dim}, party has {dim}", path)
    return povm


def _parse_assemblage(scene: dict, key: str, dim: int, reader: _Reader):
    if key not in scene:
        return None
    items = scene[key]
    if not isinstance(items, list) or not items:
        raise reader.fail("expected a non-empty list of POVMs", (key,))
    povms = [_parse_povm(p, dim, reader, (key, i)) for i, p in enumerate(items)]
    try:
        return MeasurementAssemblage.from_povms(povms)
    except LhvLabError as exc:
        raise reader.fail(str(exc), (key,)) from None


PARAM_DEFAULTS = {
    "dist_tol": DIST_TOL,
    "gap_tol": GAP_TOL,
    "feas_tol": FEAS_TOL,
    "max_iters": MAX_ITERS,
    "seed": 0,
    "threads": 1,
    "cap": DEFAULT_CAP,
    "method": "accelerated",
}


def _resolve_params(given: dict, overrides: dict, reader: _Reader) -> dict:
    if not isinstance(given, dict):
        raise reader.fail("params must be an object", ("params",))
    unknown = sorted(set(given) - set(PARAM_DEFAULTS))
    if unknown:
        raise reader.fail(f"unknown parameter {unknown[0]!r}", ("params", unknown[0]))
    params = dict(PARAM_DEFAULTS)
    params.update(given)
    params.update({k: v for k, v in overrides.items() if v is not None})
    for key in ("dist_tol", "gap_tol", "feas_tol"):
        v = params[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
            raise reader.fail(f"{key!r} must be a positive number", ("params", key))
        params[key] = float(v)
    for key in ("max_iters", "threads", "cap"):
        v = params[key]
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise reader.fail(f"{key!r} must be a positive integer", ("params", key))
    if isinstance(params["seed"], bool) or not isinstance(params["seed"], int) or params["seed"] < 0:
        raise reader.fail("'seed' must be a nonnegative integer", ("params", "seed"))
    if params["method"] not in ("accelerated", "frank-wolfe"):
        raise reader.fail("'method' must be 'accelerated' or 'frank-wolfe'", ("params", "method"))
    return params


def load_scene(text: str, overrides: Optional[dict] = None) -> Scene:
    """Parse and validate a scene; every check runs before any solver.

    Raises
    ------
    SceneError
        With a line number where one can be attributed.
    """
    reader = _Reader(text)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError(f"invalid JSON: {exc.msg} (column {exc.colno})", exc.lineno) from None
    if not isinstance(raw, dict):
        raise SceneError("scene must be a JSON object", 1)
    if raw.get("schema") != SCHEMA:
        raise reader.fail(f"'schema' must be {SCHEMA}", ("schema",))
    task = raw.get("task")
    if task not in TASKS:
        raise reader.fail(f"'task' must be one of {', '.join(TASKS)}", ("task",))
    params = _resolve_params(raw.get("params", {}), overrides or {}, reader)
    rng = np.random.default_rng(params["seed"])
    if "state" not in raw:
        raise reader.fail("missing 'state'")
    state, dims = _parse_state(raw["state"], reader, rng)
    alice = _parse_assemblage(raw, "alice_assemblage", dims[0], reader)
    bob = _parse_assemblage(raw, "bob_assemblage", dims[1], reader)
    need = {
        "bell": ("alice_assemblage", "bob_assemblage"),
        "steer-ab": ("alice_assemblage",),
        "steer-ba": ("bob_assemblage",),
        "criterion": ("alice_assemblage",),
        "construct-measurements": (),
    }[task]
    for key in need:
        if key not in raw:
            raise reader.fail(f"task {task!r} needs {key!r}", ("task",))
    if task == "criterion" and alice.m < 2:
        raise reader.fail("criterion needs at least two POVMs", ("alice_assemblage",))
    return Scene(task, state, dims, alice, bob, params)


# -- report formatting --------------------------------------------------------


def _encode(obj) -> Any:
    """Convert numpy data to JSON-ready values; complex arrays become ``[re, im]``."""
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return _encode(np.stack([obj.real, obj.imag], axis=-1).tolist())
        return _encode(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def dumps(obj, indent: int = 0, step: int = 2) -> str:
    """JSON text with floats written to 17 significant digits.

    Lists of scalars stay on one line, which keeps matrices readable.
    """
    pad = " " * (indent + step)
    end = " " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + step, step)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent + step, step) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, int):
        return str(obj)
    return json.dumps(obj)


# -- tasks ---------------------------------------------------------------------


def _run_bell(scene: Scene) -> tuple[str, dict, dict, list[str]]:
    p = correlations_of(scene.state, scene.alice, scene.bob)
    verdict = decide_bell_local(p, scene.params["feas_tol"], scene.params["cap"])
    o_a, o_b, m_a, m_b = p.shape
    lines = [f"scenario: m_A={m_a} o_A={o_a} m_B={m_b} o_B={o_b}"]
    if verdict.local:
        sa = enumerate_strategies(m_a, o_a).table
        sb = enumerate_strategies(m_b, o_b).table
        w = verdict.model.weights
        support = [
            {"alice_strategy": sa[k].tolist(), "bob_strategy": sb[j].tolist(), "weight": float(w[k, j])}
            for k, j in zip(*np.nonzero(w > 0))
        ]
        cert = {"kind": "local_model", "weights": w, "support": support}
        lines.append(f"local model on {len(support)} deterministic strategy pairs")
        return "Local", cert, {"reconstruction": verdict.residual}, lines
    wit = verdict.witness
    cert = {
        "kind": "bell_witness",
        "coefficients": wit.coefficients,
        "local_bound": wit.local_bound,
        "value_on_target": wit.value_on_target,
        "index_order": "a, b, x, y",
    }
    lines.append(
        f"witness: <L, p> = {wit.value_on_target:.6g} < local minimum {wit.local_bound:.6g}"
    )
    return "Nonlocal", cert, {"separation_margin": verdict.residual}, lines


def _run_steer(scene: Scene, reverse: bool) -> tuple[str, dict, dict, list[str]]:
    if reverse:
        rho = swap_parties(scene.state, *scene.dims)
        ma = scene.bob
    else:
        rho, ma = scene.state, scene.alice
    sigma = assemblage_of(rho, ma)
    params = scene.params
    verdict = decide_unsteerable(
        sigma,
        dist_tol=params["dist_tol"],
        gap_tol=params["gap_tol"],
        max_iters=params["max_iters"],
        cap=params["cap"],
        method=params["method"],
        threads=params["threads"],
    )
    residuals = {"distance": verdict.distance, "fw_gap": verdict.fw_gap, "iterations": verdict.iterations}
    direction = "B->A" if reverse else "A->B"
    lines = [f"direction {direction}: m={sigma.m} o={sigma.o} d={sigma.dim}"]
    if verdict.unsteerable:
        model = verdict.model
        table = model.space.table
        weights = model.weights
        hidden = [
            {"strategy": table[k].tolist(), "weight": float(weights[k]), "tau": model.tau[k]}
            for k in np.flatnonzero(weights > 0)
        ]
        recon = model.reconstruct()
        residuals["reconstruction"] = float(np.linalg.norm(recon - sigma.members))
        cert = {"kind": "lhs_model", "hidden_states": hidden}
        lines.append(f"LHS model with {len(hidden)} hidden states, distance {verdict.distance:.3g}")
        return "Unsteerable", cert, residuals, lines
    wit = verdict.witness
    cert = {
        "kind": "steering_witness",
        "functionals": wit.functionals,
        "lhs_bound": wit.lhs_bound,
        "value_on_target": wit.value_on_target,
        "index_order": "x, a",
    }
    lines.append(
        f"witness: value {wit.value_on_target:.6g} > LHS maximum {wit.lhs_bound:.6g}; "
        f"distance {verdict.distance:.6g}, gap {verdict.fw_gap:.3g}"
    )
    return "Steerable", cert, residuals, lines


def _run_criterion(scene: Scene) -> tuple[str, dict, dict, list[str]]:
    p, q = scene.alice.povm(0), scene.alice.povm(1)
    found = criterion_disjoint_bases(scene.state, p, q)
    if found is None:
        return "Inconclusive", {"kind": "none"}, {}, ["disjoint-bases criterion does not apply"]
    cert = {"kind": "disjoint_bases", "e": found.e, "f": found.f, "c": found.c, "d": found.d}
    return "Steerable", cert, {}, ["conditional states are rank one on disjoint bases"]


def _run_construct(scene: Scene) -> tuple[str, dict, dict, list[str]]:
    p, q = steering_measurements_for_pure(scene.state, scene.dims)
    found = criterion_disjoint_bases(scene.state, p, q)
    cert = {"kind": "measurements", "P": p.effects, "Q": q.effects, "criterion_certified": found is not None}
    lines = [f"constructed P and Q ({p.outcomes} outcomes each); criterion {'holds' if found else 'fails'}"]
    return "Constructed", cert, {}, lines


def run_scene(scene: Scene) -> tuple[str, dict, dict, list[str]]:
    if scene.task == "bell":
        return _run_bell(scene)
    if scene.task == "steer-ab":
        return _run_steer(scene, reverse=False)
    if scene.task == "steer-ba":
        return _run_steer(scene, reverse=True)
    if scene.task == "criterion":
        return _run_criterion(scene)
    return _run_construct(scene)


def exit_code_for(verdict: str) -> int:
    return EXIT_CODES.get(verdict, EXIT_OK)


# -- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lhvlab", description="Bell locality and steering decisions")
    parser.add_argument("--version", action="version", version=f"lhvlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="evaluate a scene file")
    run.add_argument("scene", help="path to a scene JSON file")
    run.add_argument("--out", help="write the report here instead of stdout")
    run.add_argument("--threads", type=int)
    run.add_argument("--dist-tol", type=float)
    run.add_argument("--gap-tol", type=float)
    run.add_argument("--feas-tol", type=float)
    run.add_argument("--max-iters", type=int)
    run.add_argument("--seed", type=int)
    return parser


def _emit(report: dict, out: Optional[str]) -> None:
    text = dumps(_encode(report)) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    try:
        with open(args.scene, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"{args.scene}: cannot read scene: {exc.strerror}", file=sys.stderr)
        return EXIT_INPUT
    overrides = {
        "threads": args.threads,
        "dist_tol": args.dist_tol,
        "gap_tol": args.gap_tol,
        "feas_tol": args.feas_tol,
        "max_iters": args.max_iters,
        "seed": args.seed,
    }
    try:
        scene = load_scene(text, overrides)
    except SceneError as exc:
        where = f"{args.scene}:{exc.line}" if exc.line else args.scene
        print(f"{where}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    base = {"version": __version__, "task": scene.task, "params": scene.params}
    start = time.perf_counter()
    try:
        verdict, cert, residuals, lines = run_scene(scene)
    except CapacityError as exc:
        _emit({**base, "verdict": "CapacityExceeded", "error": str(exc)}, args.out)
        print(f"capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (IndeterminateError, SolverError, ConvergenceError) as exc:
        _emit({**base, "verdict": "Indeterminate", "error": str(exc)}, args.out)
        print(f"indeterminate: {exc}", file=sys.stderr)
        return EXIT_INDETERMINATE
    except (DomainError, DimensionError) as exc:
        print(f"{args.scene}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    elapsed = time.perf_counter() - start
    report = {
        **base,
        "verdict": verdict,
        "certificate": cert,
        "residuals": residuals,
        "wall_time": elapsed,
    }
    _emit(report, args.out)
    print(f"{scene.task}: {verdict}", file=sys.stderr)
    for line in lines:
        print(f"  {line}", file=sys.stderr)
    print(f"  wall time {elapsed:.3f} s", file=sys.stderr)
    return exit_code_for(verdict)


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
