"""Scenario-driven command line producing deterministic JSON reports.

Every subcommand is a thin wrapper over one library operation; ``scenario
run`` executes a task list from a JSON file. Reports are self-contained
(matrices embedded), schema-tagged, and byte-stable across runs for fixed
seeds. Exit codes: 0 all tasks passed, 1 at least one task failed, 2 for
usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from ._linalg import spectral_norm
from .charfn import verify_factorization
from .contractions import RowContraction, validate
from .dilation import (
    build_dilation,
    dilation_index,
    model_space,
    shift_multiplicity,
    verify_dilation,
    wold_decompose,
)
from .errors import FockbenchError, InvalidParameterError
from .ideals import NcPolynomial, build_constrained_subspace, constrained_shifts
from .interpolation import PickProblem, pick_feasible, pick_matrix, variety_membership
from .invariants import arveson_curvature, curvature_phi, curvature_theta, euler_phi
from .poisson import constrained_poisson_kernel, intertwining_check, kernel_gram, poisson_kernel
from .serialize import (
    complex_to_json,
    ideal_from_spec,
    matrix_from_json,
    matrix_to_json,
    point_from_json,
)
from .words import TruncatedFock

SCHEMA = "fockbench-report/1"


@dataclass
class RunContext:
    n: int
    trunc: int
    generators: list[NcPolynomial]
    rc: RowContraction | None
    tol: float
    seed: int | None
    _fock: TruncatedFock | None = field(default=None, repr=False)
    _cs: object = field(default=None, repr=False)

    def fock(self) -> TruncatedFock:
        if self._fock is None:
            self._fock = TruncatedFock(self.n, self.trunc)
        return self._fock

    def cs(self):
        if self._cs is None:
            self._cs = build_constrained_subspace(self.fock(), self.generators)
        return self._cs


def _check(name: str, value: float, bound: float) -> dict:
    return {"name": name, "value": float(value), "bound": float(bound), "pass": bool(value <= bound)}


# --- task handlers ---------------------------------------------------------


def task_shifts(ctx: RunContext, params: dict) -> dict:
    cs = ctx.cs()
    left, right = constrained_shifts(cs)
    checks = [
        _check("projection_idempotent", spectral_norm(cs.projection @ cs.projection - cs.projection), 1e-12),
    ]
    data: dict = {"dim": cs.dim, "slice_dims": cs.slice_dims, "graded": cs.graded}
    if cs.contains_vacuum():
        v0 = cs.vacuum_vector()
        defect = np.eye(cs.dim) - sum(b @ b.conj().T for b in left)
        window = cs.degree_window_mask(cs.fock.max_degree - 1)
        diff = (defect - np.outer(v0, v0.conj()))[np.ix_(window, window)]
        checks.append(_check("defect_is_vacuum_projection", spectral_norm(diff), 1e-10))
    if params.get("emit_matrices", True):
        data["left_shifts"] = [matrix_to_json(b) for b in left]
        data["right_shifts"] = [matrix_to_json(w) for w in right]
    return {"checks": checks, "data": data}


def task_factorize(ctx: RunContext, params: dict) -> dict:
    rc = ctx.rc
    mode = params.get("mode", "point")
    tol = float(params.get("tol", ctx.tol))
    checks = []
    data: dict = {"mode": mode}
    constrained = bool(ctx.generators)
    if mode == "point":
        points = [point_from_json(p, ctx.n) for p in params.get("points", [])]
        count = int(params.get("random_points", 0))
        if count:
            seed = params.get("seed", ctx.seed)
            if seed is None:
                raise InvalidParameterError("random points need a seed")
            rng = np.random.default_rng(int(seed))
            for _ in range(count):
                z = rng.standard_normal(ctx.n) + 1j * rng.standard_normal(ctx.n)
                points.append(0.8 * z / max(np.linalg.norm(z), 1e-12) * rng.uniform(0.1, 1.0))
        if not points:
            raise InvalidParameterError("point mode needs points")
        residuals = []
        for z in points:
            kind = "constrained_point" if constrained else "point"
            rep = verify_factorization(rc, mode=kind, point=list(z), cs=ctx.cs() if constrained else None, tol=tol)
            residuals.append(rep.residual)
        data["points"] = [[complex_to_json(v) for v in z] for z in points]
        data["residuals"] = residuals
        checks.append(_check("point_factorization_max_residual", max(residuals), tol))
    elif mode == "truncated":
        kind = "constrained_truncated" if constrained else "truncated"
        rep = verify_factorization(
            rc, mode=kind, fock=ctx.fock() if not constrained else None,
            cs=ctx.cs() if constrained else None, tol=tol,
        )
        data["residual"] = rep.residual
        data["budget"] = rep.budget
        checks.append(_check("truncated_factorization_residual", rep.residual, max(rep.budget, tol)))
    else:
        raise InvalidParameterError(f"unknown factorize mode {mode!r}")
    return {"checks": checks, "data": data}


def task_curvature(ctx: RunContext, params: dict) -> dict:
    rc = ctx.rc
    m_max = int(params.get("m_max", 6))
    method = params.get("method", "both")
    checks = []
    data: dict = {}
    if method in ("phi", "both"):
        rep = curvature_phi(rc, m_max)
        data["phi"] = {
            "m": rep.m_values, "sequence": rep.sequence, "last": rep.last, "aitken": rep.aitken,
            "kernel_slice_increments": rep.extras["kernel_slice_increments"],
        }
        erep = euler_phi(rc, m_max)
        data["euler_phi"] = {"m": erep.m_values, "sequence": erep.sequence, "ranks": erep.extras["ranks"]}
    if method in ("theta", "both"):
        fock = TruncatedFock(ctx.n, m_max + 1)
        rep = curvature_theta(rc, fock, m_max)
        data["theta"] = {
            "m": rep.m_values, "sequence": rep.sequence, "last": rep.last, "aitken": rep.aitken,
            "euler_sequence": rep.extras["euler_sequence"],
        }
        checks.append(_check("cross_method_gap", max(rep.extras["cross_check_vs_phi"]), 1e-8))
    return {"checks": checks, "data": data}


def task_arveson(ctx: RunContext, params: dict) -> dict:
    rc = ctx.rc
    seed = params.get("seed", ctx.seed)
    if seed is None:
        raise InvalidParameterError("arveson needs a seed")
    rep = arveson_curvature(
        rc,
        m_max=int(params.get("m_max", 8)),
        mc_samples=int(params.get("mc_samples", 100_000)),
        seed=int(seed),
        r_values=tuple(params.get("r_values", (0.9, 0.99, 0.999))),
    )
    data = {
        "boundary": {f"{r:g}": {"estimate": est, "mc_stderr": err} for r, (est, err) in rep.boundary.items()},
        "qm_sequence": rep.qm_sequence,
        "euler_sequence": rep.euler_sequence,
        "normalized_anchor": rep.normalized_anchor,
        "deviations": rep.deviations,
        "seed": rep.seed,
        "mc_samples": rep.mc_samples,
    }
    checks = [_check("boundary_vs_qm", rep.deviations["boundary_vs_qm"], float(params.get("agree_tol", 2e-2)))]
    return {"checks": checks, "data": data}


def task_pick(ctx: RunContext, params: dict) -> dict:
    points = [point_from_json(p, ctx.n) for p in params["points"]]
    targets = [matrix_from_json(a) if isinstance(a, dict) else np.atleast_2d(complex(a[0], a[1]))
               for a in params["targets"]]
    tol = float(params.get("tol", 1e-9))
    for z in points:
        member = variety_membership(z, ctx.generators, ctx.n)
        if not member.member:
            raise FockbenchError(f"point {z} is not in the variety of the ideal")
    problem = PickProblem(n=ctx.n, points=np.array(points), targets=targets,
                          generators=list(ctx.generators))
    m = pick_matrix(problem)
    res = pick_feasible(problem, tol)
    verdict = "feasible (marginal)" if (res.feasible and res.marginal) else (
        "feasible" if res.feasible else "infeasible")
    data = {
        "verdict": verdict,
        "feasible": res.feasible,
        "marginal": res.marginal,
        "lambda_min": res.lambda_min,
        "lambda_max": res.lambda_max,
        "pick_matrix": matrix_to_json(m),
    }
    if res.certificate is not None:
        data["certificate"] = matrix_to_json(res.certificate.reshape(-1, 1))
    return {"checks": [], "data": data}


def task_wold(ctx: RunContext, params: dict) -> dict:
    split = wold_decompose(list(ctx.rc.matrices), k_max=params.get("k_max"))
    mult = shift_multiplicity(list(ctx.rc.matrices))
    checks = [
        _check("two_path_max_angle", float(split.two_path_angles.max(initial=0.0)), 1e-8),
        _check("two_path_dim_mismatch", 0.0 if split.two_path_dim_match else 1.0, 0.0),
    ]
    data = {
        "multiplicity": split.multiplicity,
        "k0_dim": int(split.k0_basis.shape[1]),
        "k1_dim": int(split.k1_basis.shape[1]),
        "idempotency_defect": split.idempotency_defect,
        "is_shift": mult.is_shift,
    }
    return {"checks": checks, "data": data}


def task_dilate(ctx: RunContext, params: dict) -> dict:
    blocks = build_dilation(ctx.rc, ctx.cs())
    rep = verify_dilation(blocks)
    checks = [
        _check("embedding_isometry_defect", blocks.isometry_defect, max(blocks.isometry_budget, 1e-10)),
        _check("cuntz_identity", blocks.cuntz_residual, 1e-10),
        _check("cuntz_constraints", max(blocks.constraint_residuals, default=0.0), 1e-10),
        _check("dilation_intertwining", rep.residual, rep.budget),
    ]
    data = {
        "k_dim": blocks.k_dim,
        "dilation_index": dilation_index(ctx.rc),
        "defect_rank": ctx.rc.defect_rank,
        "kernel_isometry_defect": blocks.kernel.isometry_defect,
    }
    return {"checks": checks, "data": data}


def task_model(ctx: RunContext, params: dict) -> dict:
    res = model_space(ctx.rc, ctx.cs())
    checks = [
        _check("projection_residual", res.projection_residual, res.projection_budget),
        _check("complement_residual", res.complement_residual, res.projection_budget),
        _check("equivalence_residual", res.equivalence_residual, res.equivalence_budget),
    ]
    data = {"model_dim": int(res.basis.shape[1])}
    return {"checks": checks, "data": data}


def task_poisson(ctx: RunContext, params: dict) -> dict:
    rc = ctx.rc
    r = float(params.get("r", 1.0))
    if ctx.generators:
        kern = constrained_poisson_kernel(rc, ctx.cs(), r)
    else:
        kern = poisson_kernel(rc, ctx.fock(), r)
    inter = intertwining_check(kern)
    gram = kernel_gram(rc, ctx.fock(), r)
    checks = [
        _check("intertwining_residual", inter.residual, 1e-10),
        _check("gram_vs_purity", gram.residual, gram.budget),
        _check("isometry_defect_vs_exact_tail", kern.isometry_defect, 1e-10),
    ]
    if kern.range_containment is not None:
        checks.append(_check("range_containment", kern.range_containment, 1e-10))
    data = {"defect_dim": kern.defect_dim, "tail_budget": kern.tail_budget}
    return {"checks": checks, "data": data}


TASKS = {
    "shifts": task_shifts,
    "factorize": task_factorize,
    "curvature": task_curvature,
    "arveson": task_arveson,
    "pick": task_pick,
    "wold": task_wold,
    "dilate": task_dilate,
    "model": task_model,
    "poisson": task_poisson,
}


def run_task(ctx: RunContext, spec: dict) -> dict:
    name = spec.get("task")
    params = {k: v for k, v in spec.items() if k != "task"}
    report = {"task": name, "params": params}
    try:
        result = TASKS[name](ctx, params)
        checks = result["checks"]
        report["checks"] = checks
        report["data"] = result["data"]
        report["status"] = "pass" if all(c["pass"] for c in checks) else "fail"
    except FockbenchError as exc:
        report["status"] = "fail"
        report["error"] = f"{type(exc).__name__}: {exc}"
    return report


# --- scenario runner -------------------------------------------------------


TUPLE_TASKS = {"factorize", "curvature", "arveson", "wold", "dilate", "model", "poisson"}


def load_scenario(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    scenario = json.loads(text)
    for key in ("n", "N", "tasks"):
        if key not in scenario:
            raise InvalidParameterError(f"scenario is missing required key {key!r}")
    for t in scenario["tasks"]:
        name = t.get("task")
        if name not in TASKS:
            raise InvalidParameterError(f"scenario names an unknown task {name!r}")
        if name in TUPLE_TASKS and "T" not in scenario:
            raise InvalidParameterError(f"task {name!r} needs a row contraction (scenario key 'T')")
        if name == "pick" and not ("points" in t and "targets" in t):
            raise InvalidParameterError("pick task needs 'points' and 'targets'")
    return scenario


def context_from_scenario(scenario: dict, tol: float, seed: int | None) -> RunContext:
    n = int(scenario["n"])
    generators = ideal_from_spec(n, scenario.get("ideal"))
    rc = None
    if "T" in scenario:
        rc = validate([matrix_from_json(m) for m in scenario["T"]])
        if rc.n != n:
            raise InvalidParameterError("tuple length disagrees with the scenario dimension")
    return RunContext(
        n=n,
        trunc=int(scenario["N"]),
        generators=generators,
        rc=rc,
        tol=tol,
        seed=scenario.get("seed", seed),
    )


def run_scenario(path: str, tol: float = 1e-9, seed: int | None = None, parallel: bool = False) -> dict:
    scenario = load_scenario(path)
    ctx = context_from_scenario(scenario, tol, seed)
    tasks = scenario["tasks"]
    if parallel and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=min(4, len(tasks))) as pool:
            results = list(pool.map(lambda t: run_task(ctx, t), tasks))
    else:
        results = [run_task(ctx, t) for t in tasks]
    failed = sum(1 for r in results if r["status"] != "pass")
    return {
        "schema": SCHEMA,
        "version": __version__,
        "scenario": scenario,
        "tasks": results,
        "summary": {"total": len(results), "passed": len(results) - failed, "failed": failed},
    }


# --- argument handling -----------------------------------------------------


def _load_tuple(path: str) -> tuple[int, RowContraction]:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    rc = validate([matrix_from_json(m) for m in obj["T"]])
    n = int(obj.get("n", rc.n))
    if n != rc.n:
        raise InvalidParameterError("tuple length disagrees with declared n")
    return n, rc


def _parse_points(text: str, n: int) -> list[np.ndarray]:
    points = []
    chunks = text.split(";") if n > 1 else text.split(",")
    for chunk in chunks:
        coords = chunk.split(",") if n > 1 else [chunk]
        if len(coords) != n:
            raise InvalidParameterError(f"point {chunk!r} does not have {n} coordinates")
        points.append(np.array([complex(c.strip()) for c in coords]))
    return points


def _parse_targets(args) -> list:
    if args.targets_file:
        with open(args.targets_file, "r", encoding="utf-8") as fh:
            return [matrix_from_json(m) for m in json.load(fh)]
    if args.targets is None:
        raise InvalidParameterError("pick needs --targets or --targets-file")
    return [np.atleast_2d(complex(t.strip())) for t in args.targets.split(",")]


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _single_report(name: str, ctx: RunContext, spec: dict, out: str | None) -> int:
    result = run_task(ctx, spec)
    report = {"schema": SCHEMA, "version": __version__, "command": name, "tasks": [result],
              "summary": {"total": 1, "passed": int(result["status"] == "pass"),
                          "failed": int(result["status"] != "pass")}}
    _emit(report, out)
    return 0 if result["status"] == "pass" else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9, help="default check tolerance")
    common.add_argument("--seed", type=int, default=None, help="master seed for sampled quantities")
    common.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    common.add_argument("--format", choices=["json"], default="json", help="output format (json only)")

    parser = argparse.ArgumentParser(prog="fockbench", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("shifts", parents=[common], help="emit constrained shift matrices and defect checks")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", type=int, required=True, dest="trunc")
    p.add_argument("--ideal", default="free")
    p.add_argument("--q", default=None, help="JSON q matrix for the q-commutative ideal")
    p.add_argument("--no-matrices", action="store_true")

    for name, needs_ideal in (("factorize", True), ("curvature", False), ("arveson", False),
                              ("wold", False), ("dilate", True), ("model", True), ("poisson", True)):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--input", required=True, help="JSON file with {n, T: [matrices]}")
        if needs_ideal:
            p.add_argument("--ideal", default="free")
            p.add_argument("--q", default=None)
        p.add_argument("--N", type=int, default=6, dest="trunc")
        if name == "factorize":
            p.add_argument("--mode", choices=["point", "truncated"], default="point")
            p.add_argument("--points", default=None)
            p.add_argument("--random-points", type=int, default=0)
        if name == "curvature":
            p.add_argument("--m-max", type=int, default=6)
            p.add_argument("--method", choices=["phi", "theta", "both"], default="both")
        if name == "arveson":
            p.add_argument("--m-max", type=int, default=8)
            p.add_argument("--mc-samples", type=int, default=100_000)
            p.add_argument("--r-list", default="0.9,0.99,0.999")
        if name == "wold":
            p.add_argument("--k-max", type=int, default=None)
        if name == "poisson":
            p.add_argument("--r", type=float, default=1.0)

    p = sub.add_parser("pick", parents=[common], help="Pick-matrix feasibility test")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--points", required=True, help="n=1: 'z1,z2,...'; n>1: 'a,b;c,d;...'")
    p.add_argument("--targets", default=None, help="comma-separated scalar targets")
    p.add_argument("--targets-file", default=None, help="JSON list of matrix targets")
    p.add_argument("--ideal", default="free")
    p.add_argument("--q", default=None)

    p = sub.add_parser("scenario", parents=[common], help="scenario file runner")
    p.add_argument("action", choices=["run"])
    p.add_argument("path")
    p.add_argument("--parallel", action="store_true")
    return parser


def _ideal_arg(args, n: int):
    spec = getattr(args, "ideal", "free")
    if spec == "q-commutative":
        if getattr(args, "q", None) is None:
            raise InvalidParameterError("q-commutative ideal needs --q")
        return {"kind": "q-commutative", "q": json.loads(args.q)}
    return spec


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "scenario":
            report = run_scenario(args.path, tol=args.tol, seed=args.seed, parallel=args.parallel)
            _emit(report, args.out)
            return 0 if report["summary"]["failed"] == 0 else 1

        if args.command == "shifts":
            ctx = RunContext(n=args.n, trunc=args.trunc,
                             generators=ideal_from_spec(args.n, _ideal_arg(args, args.n)),
                             rc=None, tol=args.tol, seed=args.seed)
            return _single_report("shifts", ctx, {"task": "shifts", "emit_matrices": not args.no_matrices}, args.out)

        if args.command == "pick":
            points = _parse_points(args.points, args.n)
            targets = _parse_targets(args)
            ctx = RunContext(n=args.n, trunc=max(2, args.n),
                             generators=ideal_from_spec(args.n, _ideal_arg(args, args.n)),
                             rc=None, tol=args.tol, seed=args.seed)
            spec = {"task": "pick",
                    "points": [[[float(v.real), float(v.imag)] for v in z] for z in points],
                    "targets": [matrix_to_json(np.atleast_2d(t)) for t in targets],
                    "tol": args.tol}
            return _single_report("pick", ctx, spec, args.out)

        n, rc = _load_tuple(args.input)
        ideal = ideal_from_spec(n, _ideal_arg(args, n)) if hasattr(args, "ideal") else []
        ctx = RunContext(n=n, trunc=args.trunc, generators=ideal, rc=rc, tol=args.tol, seed=args.seed)
        spec: dict = {"task": args.command}
        if args.command == "factorize":
            spec["mode"] = args.mode
            if args.points:
                spec["points"] = [[[float(v.real), float(v.imag)] for v in z]
                                  for z in _parse_points(args.points, n)]
            if args.random_points:
                spec["random_points"] = args.random_points
        elif args.command == "curvature":
            spec["m_max"] = args.m_max
            spec["method"] = args.method
        elif args.command == "arveson":
            spec["m_max"] = args.m_max
            spec["mc_samples"] = args.mc_samples
            spec["r_values"] = [float(x) for x in args.r_list.split(",")]
            spec["seed"] = args.seed
        elif args.command == "wold":
            spec["k_max"] = args.k_max
        elif args.command == "poisson":
            spec["r"] = args.r
        return _single_report(args.command, ctx, spec, args.out)

    except json.JSONDecodeError as exc:
        print(f"error: cannot parse JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", file=sys.stderr)
        return 2
    except (InvalidParameterError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FockbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
