"""Declarative scenarios: named constructors and parameters only, no
embedded code.  A scenario lists tasks; each task builds objects through
the library, runs one certification, and reports a certificate together
with optional sample artifacts for CSV dumping."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .dspace import (
    DEFAULT_GRID, INFEASIBLE, PASS, TOL_LINEAR, Certificate, DMap, DPath,
    SampleGrid, as_point, certify_directed_path, concatenate, constant_path,
    derive_space, directed_interval, frac, make_standard_space,
    reparametrize, wedge_total_space,
)
from .homotopy import (
    DHomotopy, certify_vertical_chain, point_dist, theta_warp,
)
from .fibration import (
    FibrationWitness, LiftProblem, PointedPath, check_lifting_pair,
    epsilon_pair, make_product_fibration, make_wedge_fibration,
    max_structure_fibration, opposite_fibration, pullback_fibration,
    weak_lift, wedge_strict_infeasibility,
)
from .transport import (
    bs_spaces_equivalence, certify_equivalence_pack, cylinder_retraction,
    dhe_to_fhe, fiber_transport, pointed_path_dist,
)
from .sampling import (
    pointed_probe, product_section, random_pl_path, rng_for, wedge_section,
)

SCHEMA_VERSION = 1


@dataclass
class RunContext:
    grid: SampleGrid = DEFAULT_GRID
    tol: float = TOL_LINEAR
    seed: int = 0


@dataclass
class TaskResult:
    name: str
    kind: str
    certificate: Certificate
    expected: str
    ms: float
    artifacts: dict = field(default_factory=dict)

    @property
    def as_expected(self) -> bool:
        return self.certificate.verdict == self.expected


def build_space(desc: dict):
    kind = desc["kind"]
    if kind == "wedge":
        return wedge_total_space()
    return make_standard_space(kind, int(desc.get("dim", 1)))


def build_witness(desc: dict):
    kind = desc["type"]
    if kind == "product":
        return make_product_fibration(build_space(desc["base"]),
                                      build_space(desc["fiber"]))
    if kind == "wedge":
        return make_wedge_fibration()[0]
    if kind == "opposite_wedge":
        return opposite_fibration(make_wedge_fibration()[0])
    if kind == "pullback_product":
        base = make_standard_space("directed_In", 1)
        inner = make_product_fibration(base, build_space(
            desc.get("fiber", {"kind": "directed_In", "dim": 1})))
        # nonlinear squaring map into the base
        f = DMap(lambda b: b ** 2, make_standard_space("directed_In", 1),
                 base)
        return pullback_fibration(inner, f)
    if kind == "max_structure":
        from .dspace import Carrier
        dB = make_standard_space("directed_Rn", 1)
        carrier = Carrier(2, lambda pt: True, "R^2(max)")

        def lifter(pp):
            fiber = float(pp.e[1])
            return DPath(lambda t, om=pp.omega, fiber=fiber:
                         np.append(om(t), fiber),
                         tuple(pp.omega.breakpoints), None)

        w = max_structure_fibration(carrier, lambda pt: pt[:1], dB, lifter)
        # the raw lifter has no space handle; rebind outputs to the total
        E = w.total

        def bound(pp, E=E):
            raw = lifter(pp)
            return DPath(raw.fn, raw.breakpoints, E)

        from .fibration import LiftingPair
        return FibrationWitness(w.p, LiftingPair({0: bound, 1: bound}),
                                w.provenance)
    raise ValueError(f"unknown witness type: {kind}")


def _witness_section(desc: dict):
    kind = desc["type"]
    if kind == "product":
        return product_section(build_space(desc["fiber"]))
    if kind in ("wedge", "opposite_wedge"):
        return wedge_section
    if kind == "pullback_product":
        def section(b, rng):
            b = np.asarray(b, dtype=float).reshape(-1)
            return np.concatenate([b, b ** 2,
                                   rng.uniform(0, 1, size=1)])
        return section
    if kind == "max_structure":
        def section(b, rng):
            return np.append(np.asarray(b, dtype=float).reshape(-1),
                             rng.uniform(0, 1))
        return section
    raise ValueError(f"no probe section for witness type: {kind}")


def _probe_bounds(desc: dict):
    if desc["type"] in ("wedge", "opposite_wedge", "max_structure"):
        return 0.0, 2.0
    return 0.0, 1.0


# ---------------------------------------------------------------------------
# task implementations


def task_axioms(params: dict, ctx: RunContext):
    space = build_space(params["space"])
    rng = rng_for(ctx.seed)
    n = int(params.get("paths", 20))
    monotone = space.structure_tag != "natural"
    low, high = (0.0, 1.0) if "In" in params["space"].get("kind", "") \
        else (-1.0, 1.0)
    if params["space"].get("kind") == "wedge":
        low, high = 0.0, 1.0
    certs = []
    warp = theta_warp(Fraction(1, 4))
    artifacts = {}
    for i in range(n):
        if params["space"].get("kind") == "wedge":
            x = random_pl_path(rng, make_standard_space("directed_Rn", 1),
                               monotone=True, low=low, high=high)
            path = DPath(lambda t, x=x: np.append(x(t), float(x(t)[0])),
                         x.breakpoints, space)
        else:
            path = random_pl_path(rng, space, monotone=monotone,
                                  low=low, high=high)
        certs.append(certify_directed_path(space, path, ctx.grid, ctx.tol))
        certs.append(certify_directed_path(
            space, constant_path(space, path(Fraction(0))), ctx.grid,
            ctx.tol))
        warped = reparametrize(path, warp.forward, warp.forward_breakpoints,
                               ctx.grid)
        certs.append(certify_directed_path(space, warped, ctx.grid, ctx.tol))
        glued = concatenate(_first_half(path, space), _second_half(path,
                                                                   space))
        certs.append(certify_directed_path(space, glued, ctx.grid, ctx.tol))
        if i == 0:
            artifacts["sample_path"] = _samples(path, ctx.grid)
    return Certificate.combine(certs, "axioms"), artifacts


def _first_half(path: DPath, space) -> DPath:
    return DPath(lambda t, p=path: p(frac(t) / 2),
                 tuple(b * 2 for b in path.breakpoints if b <= Fraction(1, 2)),
                 space)


def _second_half(path: DPath, space) -> DPath:
    return DPath(lambda t, p=path: p((1 + frac(t)) / 2),
                 tuple(2 * b - 1 for b in path.breakpoints
                       if b >= Fraction(1, 2)), space)


def _samples(obj, grid: SampleGrid, bps=()):
    ts = grid.params(bps)
    return [(float(t), np.asarray(obj(t), dtype=float)) for t in ts]


def task_lifting_pair(params: dict, ctx: RunContext):
    desc = params["witness"]
    w = build_witness(desc)
    section = _witness_section(desc)
    low, high = _probe_bounds(desc)
    rng = rng_for(ctx.seed)
    n = int(params.get("probes", 25))
    decreasing = desc["type"].startswith("opposite")
    probes = [pointed_probe(rng, w, section, mode=i % 2, low=low, high=high,
                            decreasing=decreasing)
              for i in range(n)]
    cert = check_lifting_pair(w.lifter, w.p, probes, ctx.grid, ctx.tol)
    art = {"lift_of_probe0": _samples(w.lifter.lift(probes[0]), ctx.grid,
                                      probes[0].omega.breakpoints)}
    return cert, art


def task_wedge_strict(params: dict, ctx: RunContext):
    return wedge_strict_infeasibility(grid=ctx.grid, tol=ctx.tol), {}


def task_wedge_weak_lift(params: dict, ctx: RunContext):
    w, _ = make_wedge_fibration()
    one_pt = make_standard_space("natural_Rn", 1)
    star = np.zeros(1)
    f_prime = DMap(lambda x: as_point(0.0, -1.0), one_pt, w.total)
    phi = DHomotopy(lambda x, t: as_point(float(t)), one_pt, w.base)
    sol = weak_lift(w, LiftProblem(f_prime, phi, 0))
    tol = float(params.get("tol", 1e-12))
    worst = 0.0
    for t in ctx.grid.params(sol.phi_prime.t_breakpoints):
        worst = max(worst, point_dist(sol.phi_prime(star, t),
                                      as_point(float(t), float(t))))
    step = sol.vertical.chain.steps[0].homotopy
    for s in ctx.grid.params(step.t_breakpoints):
        worst = max(worst, point_dist(step(star, s),
                                      as_point(0.0, float(s) - 1.0)))
    vcert = certify_vertical_chain(sol.vertical, [star], ctx.grid, ctx.tol)
    cert = Certificate.combine(
        [Certificate.from_violation("wedge.weak-lift.formulas", worst, tol),
         vcert], "wedge.weak-lift")
    art = {"diagonal_lift": _samples(lambda t: sol.phi_prime(star, t),
                                     ctx.grid),
           "straightening": _samples(lambda t: step(star, t), ctx.grid)}
    return cert, art


def task_weak_lift(params: dict, ctx: RunContext):
    desc = params["witness"]
    w = build_witness(desc)
    section = _witness_section(desc)
    low, high = _probe_bounds(desc)
    rng = rng_for(ctx.seed)
    n = int(params.get("problems", 10))
    X = make_standard_space("directed_In", 1)
    xs = [as_point(v) for v in np.linspace(0, 1, 7)]
    certs = []
    for i in range(n):
        alpha = i % 2
        base0 = random_pl_path(rng, w.base, monotone=True, low=low,
                               high=high)

        def phi_fn(x, t, base0=base0, alpha=alpha):
            u = (frac(t) + frac(float(x[0]))) / 2
            return base0(u if alpha == 0 else u)

        phi = DHomotopy(phi_fn, X, w.base)
        f0 = DMap(lambda x, phi=phi, alpha=alpha: section(
            phi(x, Fraction(alpha)), rng_for(ctx.seed + 1)), X, w.total)
        sol = weak_lift(w, LiftProblem(f0, phi, alpha))
        worst = 0.0
        for x in xs:
            for t in ctx.grid.params(sol.phi_prime.t_breakpoints):
                worst = max(worst, point_dist(w.p(sol.phi_prime(x, t)),
                                              phi(x, t)))
        certs.append(Certificate.from_violation(
            f"weak-lift.projection[{i}]", worst, ctx.tol))
        certs.append(certify_vertical_chain(sol.vertical, xs, ctx.grid,
                                            ctx.tol))
    return Certificate.combine(certs, "weak-lift"), {}


def task_epsilon_pair(params: dict, ctx: RunContext):
    desc = params.get("witness", {"type": "product",
                                  "base": {"kind": "directed_In", "dim": 1},
                                  "fiber": {"kind": "directed_In",
                                            "dim": 1}})
    w = build_witness(desc)
    section = _witness_section(desc)
    eps = frac(params.get("epsilon", "1/4"))
    pair = epsilon_pair(w, eps)
    rng = rng_for(ctx.seed)
    n = int(params.get("probes", 10))
    certs = []
    for i in range(n):
        mode = i % 2
        window = (0, eps) if mode == 0 else (eps, 1)
        pp = pointed_probe(rng, w, section, mode, window=window)
        out = pair.lift(pp)
        certs.append(Certificate.from_violation(
            f"epsilon.endpoint[{i}]",
            point_dist(out(Fraction(mode)), pp.e), ctx.tol))
        worst = 0.0
        for t in ctx.grid.params(out.breakpoints, pp.omega.breakpoints):
            worst = max(worst, point_dist(w.p(out(t)), pp.omega(t)))
        certs.append(Certificate.from_violation(
            f"epsilon.projection[{i}]", worst, ctx.tol))
        certs.append(certify_directed_path(w.total, out, ctx.grid, ctx.tol))
    return Certificate.combine(certs, "epsilon-pair"), {}


def task_theta(params: dict, ctx: RunContext):
    tol = float(params.get("tol", 1e-12))
    worst = 0.0
    for eps in params.get("epsilons", ["1/10", "1/4", "1/2", "9/10"]):
        warp = theta_warp(frac(eps))
        for t in ctx.grid.params(warp.forward_breakpoints,
                                 warp.inverse_breakpoints):
            worst = max(worst,
                        abs(float(warp.forward(warp.inverse(t))) - float(t)),
                        abs(float(warp.inverse(warp.forward(t))) - float(t)))
    return Certificate.from_violation("theta.inverse", worst, tol), {}


def task_fiber_transport(params: dict, ctx: RunContext):
    B = make_standard_space("directed_In", 1)
    F = build_space(params.get("fiber", {"kind": "directed_In", "dim": 1}))
    w = make_product_fibration(B, F)
    omega = DPath(lambda t: as_point(float(t)), (), B)
    pack = fiber_transport(w, omega)
    rng = rng_for(ctx.seed)
    n = int(params.get("points", 10))
    src = [np.concatenate([[0.0], rng.uniform(0, 1, F.dim)])
           for _ in range(n)]
    tgt = [np.concatenate([[1.0], rng.uniform(0, 1, F.dim)])
           for _ in range(n)]
    certs = []
    worst = 0.0
    for e in src:
        worst = max(worst, point_dist(pack.forward(e),
                                      np.concatenate([[1.0], e[1:]])))
    certs.append(Certificate.from_violation("transport.forward", worst,
                                            ctx.tol))
    grid = SampleGrid(min(ctx.grid.resolution, 41), ctx.grid.mandatory)
    certs.append(certify_equivalence_pack(pack, src, tgt, grid, ctx.tol))
    return Certificate.combine(certs, "fiber-transport"), {}


def task_bs_equivalence(params: dict, ctx: RunContext):
    desc = params.get("witness", {"type": "product",
                                  "base": {"kind": "directed_In", "dim": 1},
                                  "fiber": {"kind": "directed_In",
                                            "dim": 1}})
    w = build_witness(desc)
    section = _witness_section(desc)
    pack = bs_spaces_equivalence(w)
    rng = rng_for(ctx.seed)
    n = int(params.get("probes", 10))
    src = [pointed_probe(rng, w, section, 0) for _ in range(n)]
    tgt = [pointed_probe(rng, w, section, 1) for _ in range(n)]
    grid = SampleGrid(min(ctx.grid.resolution, 21), ctx.grid.mandatory)
    cert = certify_equivalence_pack(pack, src, tgt, grid, ctx.tol)
    return cert, {}


def task_dhe_pipeline(params: dict, ctx: RunContext):
    B = make_standard_space("directed_In", 1)
    F = make_standard_space("natural_In", 1)
    w = make_product_fibration(B, F)
    w2 = make_product_fibration(B, F)
    f = DMap(lambda e: np.array([e[0], e[1] ** 2]), w.total, w2.total)
    f_inv = DMap(lambda e: np.array([e[0], np.sqrt(max(e[1], 0.0))]),
                 w2.total, w.total)
    from .homotopy import ChainStep, HomotopyChain
    const1 = HomotopyChain((ChainStep(True, DHomotopy(
        lambda e, t: e, w2.total, w2.total)),))
    const2 = HomotopyChain((ChainStep(True, DHomotopy(
        lambda e, t: e, w.total, w.total)),))
    pack = dhe_to_fhe(w, w2, f, f_inv, const1, const2)
    rng = rng_for(ctx.seed)
    n = int(params.get("points", 5))
    src = [rng.uniform(0, 1, 2) for _ in range(n)]
    tgt = [rng.uniform(0, 1, 2) for _ in range(n)]
    grid = SampleGrid(int(params.get("resolution", 9)), (Fraction(1, 2),))
    cert = certify_equivalence_pack(pack, src, tgt, grid, ctx.tol)
    return cert, {}


def task_cylinder_retraction(params: dict, ctx: RunContext):
    B = make_standard_space("directed_In", 1)
    I = directed_interval(1)
    F = build_space(params.get("fiber", {"kind": "directed_In", "dim": 1}))
    base = derive_space("product", B, I)
    w0 = make_product_fibration(base, F)
    w = FibrationWitness(w0.p, w0.lifter, w0.provenance,
                         {**w0.metadata, "cylinder_base": B})
    retraction, pack = cylinder_retraction(w)
    rng = rng_for(ctx.seed)
    n = int(params.get("points", 8))
    certs = []
    worst = 0.0
    for _ in range(n):
        e = rng.uniform(0, 1, w.total.dim)
        for t in ctx.grid.params((Fraction(1, 2),)):
            expected = np.concatenate([[e[0]], [float(t)]])
            worst = max(worst, point_dist(w.p(retraction.R(e, t)), expected))
    certs.append(Certificate.from_violation("cylinder.projection", worst,
                                            ctx.tol))
    src = [np.array([rng.uniform(0, 1), 0.0, rng.uniform(0, 1)])
           for _ in range(n)]
    tgt = [np.array([rng.uniform(0, 1), 1.0, rng.uniform(0, 1)])
           for _ in range(n)]
    grid = SampleGrid(min(ctx.grid.resolution, 21), ctx.grid.mandatory)
    certs.append(certify_equivalence_pack(pack, src, tgt, grid, ctx.tol))
    return Certificate.combine(certs, "cylinder-retraction"), {}


TASKS: dict = {
    "axioms": task_axioms,
    "lifting_pair": task_lifting_pair,
    "wedge_strict": task_wedge_strict,
    "wedge_weak_lift": task_wedge_weak_lift,
    "weak_lift": task_weak_lift,
    "epsilon_pair": task_epsilon_pair,
    "theta": task_theta,
    "fiber_transport": task_fiber_transport,
    "bs_equivalence": task_bs_equivalence,
    "dhe_pipeline": task_dhe_pipeline,
    "cylinder_retraction": task_cylinder_retraction,
}


class ScenarioError(Exception):
    pass


def load_scenario(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}")
    if not isinstance(data, dict) or data.get("version") != SCHEMA_VERSION:
        raise ScenarioError("scenario must be an object with version "
                            f"{SCHEMA_VERSION}")
    tasks = data.get("tasks", [])
    if not isinstance(tasks, list):
        raise ScenarioError("'tasks' must be a list")
    seen = set()
    for i, t in enumerate(tasks):
        if not isinstance(t, dict) or "name" not in t or "kind" not in t:
            raise ScenarioError(f"task {i} needs 'name' and 'kind' fields")
        if t["kind"] not in TASKS:
            raise ScenarioError(f"task {t['name']}: unknown kind "
                                f"'{t['kind']}'")
        if t["name"] in seen:
            raise ScenarioError(f"duplicate task name '{t['name']}'")
        seen.add(t["name"])
        if t.get("expect", PASS) not in (PASS, "FAIL", INFEASIBLE):
            raise ScenarioError(f"task {t['name']}: bad expect value")
    return data


def run_task(task: dict, ctx: RunContext) -> TaskResult:
    fn = TASKS[task["kind"]]
    start = time.perf_counter()
    cert, artifacts = fn(task.get("params", {}), ctx)
    ms = (time.perf_counter() - start) * 1000.0
    return TaskResult(task["name"], task["kind"], cert,
                      task.get("expect", PASS), ms, artifacts)


def run_scenario(data: dict, grid_override: Optional[int] = None,
                 tol_override: Optional[float] = None,
                 parallel: bool = False) -> list:
    grid_n = grid_override or int(data.get("grid", {}).get("resolution",
                                                           101))
    tol = tol_override if tol_override is not None \
        else float(data.get("tolerance", TOL_LINEAR))
    seed = int(data.get("seed", 0))
    entries = data.get("tasks", [])
    contexts = [RunContext(SampleGrid(grid_n), tol, seed + i)
                for i, _ in enumerate(entries)]
    if parallel and len(entries) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor() as pool:
            return list(pool.map(run_task, entries, contexts))
    return [run_task(s, c) for s, c in zip(entries, contexts)]


def report_dict(results: list, grid_n: int, tol: float) -> dict:
    tasks = [{
        "name": r.name,
        "kind": r.kind,
        "verdict": r.certificate.verdict,
        "expected": r.expected,
        "max_violation": float(f"{r.certificate.max_violation:.6e}"),
        "contract": r.certificate.checked_contract,
        "tolerance": r.certificate.tolerance,
        "ms": round(r.ms, 3),
    } for r in results]
    passed = sum(1 for r in results if r.as_expected)
    return {
        "version": SCHEMA_VERSION,
        "grid": {"resolution": grid_n},
        "tolerance": tol,
        "tasks": tasks,
        "summary": {"total": len(results), "as_expected": passed,
                    "unexpected": len(results) - passed},
    }


def dump_samples(result: TaskResult, directory: str) -> list:
    """Write each artifact as CSV (object_id, t, coord_0..)."""
    import csv
    import os
    written = []
    for name, rows in result.artifacts.items():
        path = os.path.join(directory, f"{result.name}_{name}.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            dim = len(rows[0][1]) if rows else 0
            writer.writerow(["object_id", "t"]
                            + [f"coord_{i}" for i in range(dim)])
            for t, pt in rows:
                writer.writerow([name, f"{t:.9f}"]
                                + [f"{v:.12g}" for v in np.asarray(pt)])
        written.append(path)
    return written


def explain(report: dict) -> str:
    lines = []
    for t in report.get("tasks", []):
        status = "as expected" if t["verdict"] == t["expected"] \
            else f"UNEXPECTED (wanted {t['expected']})"
        lines.append(f"{t['name']}: {t['verdict']} ({status})")
        lines.append(f"  contract '{t['contract']}' checked to tolerance "
                     f"{t['tolerance']:g}; worst violation "
                     f"{t['max_violation']:.3e}")
        if t["verdict"] == INFEASIBLE:
            lines.append("  a no-lift argument was reproduced; see the "
                         "witness in the certificate")
    s = report.get("summary", {})
    lines.append(f"{s.get('as_expected', 0)}/{s.get('total', 0)} tasks "
                 "matched their expected verdicts")
    return "\n".join(lines)
