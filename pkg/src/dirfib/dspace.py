"""Directed spaces, directed paths and maps, and sampled certification.

A d-space is a carrier (a subset of R^n) together with an oracle that
decides whether a sampled path is directed.  Everything here is checked on
finite sample grids: a PASS is a certificate at the stated resolution and
tolerance, never a proof.  Piecewise formulas carry exact rational
breakpoints so that seams like t = 1/2 are classified without float noise;
branch selection is left-closed, t in [b_i, b_{i+1}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

# Tolerances: piecewise-linear algebra is exact to rounding, nonlinear user
# data gets slack.
TOL_LINEAR = 1e-9
TOL_DEFAULT = 1e-6

PASS = "PASS"
FAIL = "FAIL"
INFEASIBLE = "INFEASIBLE"

Param = "Fraction | float"
Point = np.ndarray
Sample = "Sequence[tuple[Fraction | float, np.ndarray]]"


def as_point(*coords: float) -> np.ndarray:
    pt = np.asarray(coords, dtype=float).reshape(-1)
    if not np.all(np.isfinite(pt)):
        raise ValueError(f"point has non-finite coordinates: {pt}")
    return pt


def frac(x) -> Fraction:
    """Exact Fraction from an int, Fraction, float, or 'p/q' string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)  # float: exact binary expansion


@dataclass(frozen=True)
class Certificate:
    """Result of one sampled contract check.

    verdict is PASS iff max_violation <= tolerance; INFEASIBLE marks a
    successful reproduction of a no-lift argument rather than a failure.
    """

    verdict: str
    max_violation: float
    checked_contract: str
    tolerance: float
    witness: Optional[tuple] = None

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    @staticmethod
    def from_violation(contract: str, violation: float, tol: float,
                       witness: Optional[tuple] = None) -> "Certificate":
        verdict = PASS if violation <= tol else FAIL
        return Certificate(verdict, float(violation), contract, tol,
                           witness if verdict == FAIL else None)

    @staticmethod
    def combine(certs: Sequence["Certificate"], contract: str) -> "Certificate":
        if not certs:
            return Certificate(PASS, 0.0, contract, TOL_LINEAR)
        if any(c.verdict == INFEASIBLE for c in certs):
            c = next(c for c in certs if c.verdict == INFEASIBLE)
            return Certificate(INFEASIBLE, c.max_violation, contract,
                               c.tolerance, c.witness)
        worst = max(certs, key=lambda c: c.max_violation)
        bad = next((c for c in certs if not c.passed), None)
        verdict = PASS if bad is None else FAIL
        return Certificate(verdict, worst.max_violation, contract,
                           worst.tolerance,
                           bad.witness if bad is not None else None)


@dataclass(frozen=True)
class SampleGrid:
    """Uniform grid on [0, 1] plus mandatory exact parameters.

    resolution counts grid points per parameter axis; mandatory parameters
    (breakpoints, seams, epsilon values) are always merged in.
    """

    resolution: int = 101
    mandatory: tuple = ()

    def params(self, *extra: Iterable) -> list:
        n = self.resolution
        pts = {Fraction(i, n - 1) for i in range(n)}
        for b in self.mandatory:
            pts.add(frac(b))
        for group in extra:
            for b in group:
                pts.add(frac(b))
        return sorted(p for p in pts if 0 <= p <= 1)


DEFAULT_GRID = SampleGrid()


@dataclass(frozen=True)
class Carrier:
    """Underlying subset of R^dim given by a membership predicate."""

    dim: int
    contains: Callable[[np.ndarray], bool]
    label: str = ""

    def admits(self, pt: np.ndarray) -> bool:
        pt = np.asarray(pt, dtype=float).reshape(-1)
        if pt.shape != (self.dim,) or not np.all(np.isfinite(pt)):
            return False
        return bool(self.contains(pt))


@dataclass(frozen=True)
class DSpace:
    """Carrier plus a directedness oracle for sampled paths.

    The oracle reports a violation magnitude: 0.0 means the sample is
    accepted, larger values measure how badly directedness fails (e.g. the
    largest coordinate decrease for order-monotone structures).
    """

    carrier: Carrier
    violation: Callable[[Sequence], float]
    structure_tag: str = "custom"

    @property
    def dim(self) -> int:
        return self.carrier.dim

    def accepts(self, samples, tol: float = TOL_LINEAR) -> bool:
        return self.violation(samples) <= tol


# ---------------------------------------------------------------------------
# standard spaces

_BOX_SLACK = 1e-9


def _all_finite(pt: np.ndarray) -> bool:
    return True  # finiteness already enforced by Carrier.admits


def _in_unit_box(pt: np.ndarray) -> bool:
    return bool(np.all(pt >= -_BOX_SLACK) and np.all(pt <= 1 + _BOX_SLACK))


def _natural_violation(samples) -> float:
    return 0.0


def monotone_violation(samples) -> float:
    """Largest coordinatewise decrease along the sample (0.0 if monotone)."""
    worst = 0.0
    prev = None
    for _, pt in samples:
        pt = np.asarray(pt, dtype=float)
        if prev is not None:
            drop = float(np.max(prev - pt))
            if drop > worst:
                worst = drop
        prev = pt
    return worst


def make_standard_space(kind: str, n: int) -> DSpace:
    """Standard models: natural R^n / I^n and the coordinate-ordered
    directed versions, where a sampled path is accepted iff every
    coordinate is nondecreasing along the sample."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    if kind == "natural_Rn":
        return DSpace(Carrier(n, _all_finite, f"R^{n}"), _natural_violation,
                      "natural")
    if kind == "natural_In":
        return DSpace(Carrier(n, _in_unit_box, f"I^{n}"), _natural_violation,
                      "natural")
    if kind == "directed_Rn":
        return DSpace(Carrier(n, _all_finite, f"dR^{n}"), monotone_violation,
                      "coordinate-monotone")
    if kind == "directed_In":
        return DSpace(Carrier(n, _in_unit_box, f"dI^{n}"), monotone_violation,
                      "coordinate-monotone")
    raise ValueError(f"unknown standard space kind: {kind}")


def natural_interval(n: int = 1) -> DSpace:
    return make_standard_space("natural_In", n)


def directed_interval(n: int = 1) -> DSpace:
    return make_standard_space("directed_In", n)


def directed_line(n: int = 1) -> DSpace:
    return make_standard_space("directed_Rn", n)


# ---------------------------------------------------------------------------
# derived spaces


def _slice_samples(samples, lo: int, hi: int):
    return [(t, np.asarray(pt, dtype=float)[lo:hi]) for t, pt in samples]


def derive_space(kind: str, *args) -> DSpace:
    """Derived structures: product, subspace, cylinder, opposite.

    product conjoins the component oracles on projected samples; cylinder
    is product with the directed unit interval; opposite accepts a sample
    iff the parameter-reversed sample is accepted by the original.
    """
    if kind == "product":
        a, b = args
        na, nb = a.dim, b.dim

        def contains(pt, a=a, b=b, na=na):
            return a.carrier.admits(pt[:na]) and b.carrier.admits(pt[na:])

        def violation(samples, a=a, b=b, na=na, nb=nb):
            return max(a.violation(_slice_samples(samples, 0, na)),
                       b.violation(_slice_samples(samples, na, na + nb)))

        label = f"({a.carrier.label})x({b.carrier.label})"
        return DSpace(Carrier(na + nb, contains, label), violation, "product")

    if kind == "subspace":
        parent, predicate = args[0], args[1]
        label = args[2] if len(args) > 2 else f"sub({parent.carrier.label})"

        def contains(pt, parent=parent, predicate=predicate):
            return parent.carrier.admits(pt) and bool(predicate(pt))

        return DSpace(Carrier(parent.dim, contains, label), parent.violation,
                      "subspace")

    if kind == "cylinder":
        (base,) = args
        return derive_space("product", base, directed_interval(1))

    if kind == "opposite":
        (base,) = args

        def violation(samples, base=base):
            return base.violation(list(reversed(list(samples))))

        return DSpace(Carrier(base.dim, base.carrier.contains,
                              f"op({base.carrier.label})"),
                      violation, "opposite")

    raise ValueError(f"unknown derived space kind: {kind}")


def wedge_total_space() -> DSpace:
    """Subspace {(x, y) : x*y >= 0} of the product of the directed line
    with the natural line (first coordinate ordered, second free)."""
    ambient = derive_space("product", directed_line(1),
                           make_standard_space("natural_Rn", 1))
    return derive_space("subspace", ambient,
                        lambda pt: pt[0] * pt[1] >= -_BOX_SLACK,
                        "wedge{xy>=0}")


# ---------------------------------------------------------------------------
# paths and maps


@dataclass(frozen=True)
class DPath:
    """Evaluable path [0,1] -> carrier with exact rational breakpoints."""

    fn: Callable
    breakpoints: tuple
    space: DSpace

    def __call__(self, t):
        return np.asarray(self.fn(t), dtype=float).reshape(-1)


@dataclass(frozen=True)
class DMap:
    """Evaluable map between d-space carriers."""

    fn: Callable
    source: DSpace
    target: DSpace
    breakpoint_hint: tuple = ()

    def __call__(self, pt):
        return np.asarray(self.fn(np.asarray(pt, dtype=float)),
                          dtype=float).reshape(-1)


def constant_path(space: DSpace, pt) -> DPath:
    pt = np.asarray(pt, dtype=float).reshape(-1)
    return DPath(lambda t, pt=pt: pt, (), space)


def reparametrize(a: DPath, warp: Callable, warp_breakpoints=(),
                  grid: SampleGrid = DEFAULT_GRID) -> DPath:
    """Compose a path with a weakly increasing map [0,1] -> [0,1].

    Monotonicity of the warp is checked on the grid; the warp's own
    breakpoints are kept, the path's breakpoints are not inverse-mapped
    (the dense grid covers the images).
    """
    ts = grid.params(warp_breakpoints)
    vals = [warp(t) for t in ts]
    for u, v in zip(vals, vals[1:]):
        if float(v) < float(u) - TOL_LINEAR:
            raise ValueError("reparametrization is not nondecreasing on grid")
    if vals and (float(vals[0]) < -TOL_LINEAR or float(vals[-1]) > 1 + TOL_LINEAR):
        raise ValueError("reparametrization leaves [0, 1]")
    bps = tuple(frac(b) for b in warp_breakpoints)
    return DPath(lambda t, a=a, warp=warp: a(warp(t)), bps, a.space)


def concatenate(a: DPath, b: DPath, tol: float = TOL_DEFAULT) -> DPath:
    gap = float(np.max(np.abs(a(1) - b(0))))
    if gap > tol:
        raise ValueError(f"concatenation endpoint mismatch: {gap:.3e} > {tol}")
    half = Fraction(1, 2)

    def fn(t, a=a, b=b, half=half):
        if t < half:
            return a(2 * t)
        return b(2 * t - 1)

    bps = tuple(sorted({half}
                       | {bp / 2 for bp in a.breakpoints}
                       | {(bp + 1) / 2 for bp in b.breakpoints}))
    return DPath(fn, bps, a.space)


def opposite_path(a: DPath) -> DPath:
    """Time reversal; the result lives in the opposite d-space."""
    space = derive_space("opposite", a.space)
    bps = tuple(sorted(1 - bp for bp in a.breakpoints))
    return DPath(lambda t, a=a: a(1 - t), bps, space)


def build_path(kind: str, *args, **kwargs) -> DPath:
    if kind == "constant":
        return constant_path(*args)
    if kind == "reparametrize":
        return reparametrize(*args, **kwargs)
    if kind == "concatenate":
        return concatenate(*args, **kwargs)
    if kind == "opposite":
        return opposite_path(*args)
    raise ValueError(f"unknown path construction: {kind}")


# ---------------------------------------------------------------------------
# certification


def certify_directed_path(space: DSpace, path: DPath,
                          grid: SampleGrid = DEFAULT_GRID,
                          tol: float = TOL_LINEAR) -> Certificate:
    """PASS iff every sampled point lies in the carrier and the oracle
    accepts the sample; the path's breakpoints are forced into the grid."""
    ts = grid.params(path.breakpoints)
    samples = []
    for t in ts:
        try:
            pt = path(t)
        except Exception as exc:  # evaluation failure is a FAIL with witness
            return Certificate(FAIL, math.inf, "path.eval", tol,
                               (float(t), repr(exc)))
        if not space.carrier.admits(pt):
            return Certificate(FAIL, math.inf, "path.carrier", tol,
                               (float(t), tuple(pt)))
        samples.append((t, pt))
    violation = space.violation(samples)
    witness = None
    if violation > tol:
        for (t0, p0), (t1, p1) in zip(samples, samples[1:]):
            if space.violation([(t0, p0), (t1, p1)]) > tol:
                witness = (float(t1), tuple(p1))
                break
    return Certificate(PASS if violation <= tol else FAIL, float(violation),
                       "path.directed", tol, witness)


def certify_dmap(f: DMap, probes: Sequence[DPath],
                 grid: SampleGrid = DEFAULT_GRID,
                 tol: float = TOL_LINEAR) -> Certificate:
    """PASS iff f maps the carrier into the carrier on all probe samples and
    every composed path f . probe certifies directed in the target."""
    certs = []
    for probe in probes:
        composed = DPath(lambda t, f=f, probe=probe: f(probe(t)),
                         tuple(probe.breakpoints) + tuple(f.breakpoint_hint),
                         f.target)
        certs.append(certify_directed_path(f.target, composed, grid, tol))
    return Certificate.combine(certs, "dmap.preserves-directed")


def face_map(space: DSpace, alpha: int) -> DMap:
    """Cylinder face x -> (x, alpha) into space x directed-I."""
    if alpha not in (0, 1):
        raise ValueError("face index must be 0 or 1")
    cyl = derive_space("cylinder", space)
    return DMap(lambda pt, alpha=alpha: np.append(pt, float(alpha)),
                space, cyl)
