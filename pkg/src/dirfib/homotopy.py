"""Directed homotopies, semistationary smoothing, warps, and chains.

A directed homotopy is an evaluable map (x, t) -> point whose restriction
to each face t = 0, 1 is a map between d-spaces.  Chains record zigzags of
homotopies with explicit per-step orientation flags; a vertical chain
additionally projects to a constant under a base map.  All contracts are
certified by sampling, never assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .dspace import (
    DEFAULT_GRID, FAIL, PASS, TOL_LINEAR, Certificate, DMap, DPath, DSpace,
    SampleGrid, derive_space, frac,
)

HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)


def point_dist(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a, dtype=float)
                               - np.asarray(b, dtype=float))))


@dataclass(frozen=True)
class DHomotopy:
    """Evaluable homotopy on source x [0,1] with exact t-breakpoints.

    source may be None for homotopies whose domain is not a subset of R^n
    (e.g. spaces of pointed paths); such homotopies still evaluate and
    participate in chains, but cylinder-map certification needs a carrier.
    """

    fn: Callable
    source: Optional[DSpace]
    target: Optional[DSpace]
    t_breakpoints: tuple = ()
    chart: tuple = (Fraction(0), Fraction(1))

    def __call__(self, x, t):
        out = self.fn(x, t)
        if isinstance(out, np.ndarray) or np.isscalar(out):
            return np.asarray(out, dtype=float).reshape(-1)
        return out

    def face(self, alpha: int):
        if alpha not in (0, 1):
            raise ValueError("face index must be 0 or 1")
        fn = lambda x, h=self, alpha=alpha: h(x, Fraction(alpha))
        if self.source is not None and self.target is not None:
            return DMap(fn, self.source, self.target)
        return fn

    def at_chart(self, x, s):
        """Evaluate in interval coordinates s in [a, b]."""
        a, b = self.chart
        return self(x, (frac(s) - a) / (b - a))


def homotopy_faces(h: DHomotopy):
    return h.face(0), h.face(1)


def as_cylinder_map(h: DHomotopy) -> DMap:
    """View the homotopy as a map on the cylinder of its source."""
    if h.source is None or h.target is None:
        raise ValueError("homotopy has no carrier-backed source/target")
    cyl = derive_space("cylinder", h.source)
    return DMap(lambda pt, h=h: h(pt[:-1], pt[-1]), cyl, h.target)


def is_semistationary(h: DHomotopy, side: str, probes: Sequence,
                      grid: SampleGrid = DEFAULT_GRID,
                      tol: float = TOL_LINEAR,
                      dist: Callable = point_dist) -> Certificate:
    """PASS iff h(x, t) = h(x, 1/2) on the lower half [0, 1/2] or the upper
    half [1/2, 1] for all probe points, within tolerance."""
    if side not in ("lower", "upper"):
        raise ValueError("side must be 'lower' or 'upper'")
    ts = grid.params(h.t_breakpoints, (HALF,))
    window = [t for t in ts if (t <= HALF if side == "lower" else t >= HALF)]
    worst, witness = 0.0, None
    for x in probes:
        ref = h(x, HALF)
        for t in window:
            d = dist(h(x, t), ref)
            if d > worst:
                worst, witness = d, (float(t),)
    return Certificate.from_violation(f"homotopy.semistationary.{side}",
                                      worst, tol, witness)


def smooth(h: DHomotopy, side: str) -> DHomotopy:
    """Semistationary reshaping: freeze one half of the time interval and
    play the homotopy at double speed on the other.

    lower: t in [0,1/2] -> h(x,0), t in [1/2,1] -> h(x, 2t-1);
    upper: t in [0,1/2] -> h(x,2t), t in [1/2,1] -> h(x,1).
    The moving half rescales back: smooth_lower(x,(1+t)/2) = h(x,t) and
    smooth_upper(x, t/2) = h(x,t).
    """
    if side == "lower":
        def fn(x, t, h=h):
            if t <= HALF:
                return h(x, Fraction(0))
            return h(x, 2 * t - 1)
        bps = tuple(sorted({HALF} | {(b + 1) / 2 for b in h.t_breakpoints}))
    elif side == "upper":
        def fn(x, t, h=h):
            if t <= HALF:
                return h(x, 2 * t)
            return h(x, Fraction(1))
        bps = tuple(sorted({HALF} | {b / 2 for b in h.t_breakpoints}))
    else:
        raise ValueError("side must be 'lower' or 'upper'")
    return DHomotopy(fn, h.source, h.target, bps)


# ---------------------------------------------------------------------------
# monotone warps


@dataclass(frozen=True)
class MonotoneWarp:
    """Monotone piecewise-linear bijection of [0,1] with its exact inverse."""

    forward: Callable
    inverse: Callable
    forward_breakpoints: tuple
    inverse_breakpoints: tuple


def theta_warp(eps) -> MonotoneWarp:
    """Two-slope warp sending 1/2 to eps: 2*eps*t on [0,1/2], then
    2*(1-eps)*t + 2*eps - 1 on [1/2,1]; its inverse has breakpoint eps."""
    e = frac(eps)
    if not (0 < e < 1):
        raise ValueError("epsilon must lie strictly in (0, 1)")

    def forward(t, e=e):
        if t <= HALF:
            return 2 * e * t
        return 2 * (1 - e) * t + 2 * e - 1

    def inverse(t, e=e):
        if t <= e:
            return t / (2 * e)
        return (t + 1 - 2 * e) / (2 * (1 - e))

    return MonotoneWarp(forward, inverse, (HALF,), (e,))


def shape_path(kind: str, omega: DPath, t=None) -> DPath:
    """Path reshaping primitives used by the lifting constructions.

    scale:        t' -> omega(t * t')
    plateau3:     stationary thirds around omega replayed at triple speed
    half_plus:    omega at double speed, then parked at omega(1)
    half_minus:   parked at omega(0), then omega at double speed
    theta_t:      t' -> omega(3*t*t'/2) up to 2/3, then parked at omega(t)
    theta_prime_t: parked at omega(t) up to 1/3, then the tail of omega
                  traversed from t to 1
    """
    needs_t = kind in ("scale", "theta_t", "theta_prime_t")
    if needs_t:
        if t is None:
            raise ValueError(f"shape_path '{kind}' requires parameter t")
        t = frac(t)
        if not (0 <= t <= 1):
            raise ValueError("t must lie in [0, 1]")
    sp = omega.space

    if kind == "scale":
        bps = tuple(sorted({b / t for b in omega.breakpoints if b / t <= 1})) \
            if t > 0 else ()
        return DPath(lambda u, omega=omega, t=t: omega(t * u), bps, sp)

    if kind == "plateau3":
        third, two3 = THIRD, Fraction(2, 3)

        def fn(u, omega=omega):
            if u <= third:
                return omega(Fraction(0))
            if u <= two3:
                return omega(3 * u - 1)
            return omega(Fraction(1))
        bps = tuple(sorted({third, two3}
                           | {(b + 1) / 3 for b in omega.breakpoints}))
        return DPath(fn, bps, sp)

    if kind == "half_plus":
        def fn(u, omega=omega):
            if u <= HALF:
                return omega(2 * u)
            return omega(Fraction(1))
        bps = tuple(sorted({HALF} | {b / 2 for b in omega.breakpoints}))
        return DPath(fn, bps, sp)

    if kind == "half_minus":
        def fn(u, omega=omega):
            if u <= HALF:
                return omega(Fraction(0))
            return omega(2 * u - 1)
        bps = tuple(sorted({HALF} | {(b + 1) / 2 for b in omega.breakpoints}))
        return DPath(fn, bps, sp)

    if kind == "theta_t":
        two3 = Fraction(2, 3)

        def fn(u, omega=omega, t=t):
            if u <= two3:
                return omega(Fraction(3, 2) * t * u)
            return omega(t)
        return DPath(fn, (two3,), sp)

    if kind == "theta_prime_t":
        def fn(u, omega=omega, t=t):
            if u <= THIRD:
                return omega(t)
            return omega(t + (3 * u - 1) * (1 - t) / 2)
        return DPath(fn, (THIRD,), sp)

    raise ValueError(f"unknown path shape: {kind}")


# ---------------------------------------------------------------------------
# chains


@dataclass(frozen=True)
class ChainStep:
    """One homotopy in a zigzag; forward means the step runs from the
    previous map (t=0) to the next (t=1), backward the reverse."""

    forward: bool
    homotopy: DHomotopy

    def begin(self, x):
        return self.homotopy(x, Fraction(0 if self.forward else 1))

    def end(self, x):
        return self.homotopy(x, Fraction(1 if self.forward else 0))


@dataclass(frozen=True)
class HomotopyChain:
    steps: tuple

    def __post_init__(self):
        if not self.steps:
            raise ValueError("a homotopy chain needs at least one step")

    def start(self, x):
        return self.steps[0].begin(x)

    def end(self, x):
        return self.steps[-1].end(x)

    def reversed(self) -> "HomotopyChain":
        return HomotopyChain(tuple(ChainStep(not s.forward, s.homotopy)
                                   for s in reversed(self.steps)))

    def concat(self, other: "HomotopyChain") -> "HomotopyChain":
        return HomotopyChain(self.steps + other.steps)

    def map_values(self, g: Callable) -> "HomotopyChain":
        """Post-compose every step with a map on the target."""
        return HomotopyChain(tuple(
            ChainStep(s.forward,
                      DHomotopy(lambda x, t, s=s, g=g: g(s.homotopy(x, t)),
                                s.homotopy.source, None,
                                s.homotopy.t_breakpoints))
            for s in self.steps))

    def map_domain(self, g: Callable, source: Optional[DSpace] = None
                   ) -> "HomotopyChain":
        """Pre-compose every step with a map into the domain."""
        return HomotopyChain(tuple(
            ChainStep(s.forward,
                      DHomotopy(lambda x, t, s=s, g=g: s.homotopy(g(x), t),
                                source, s.homotopy.target,
                                s.homotopy.t_breakpoints))
            for s in self.steps))


def chain(*oriented_steps) -> HomotopyChain:
    """Build a chain from ('fwd'|'bwd', homotopy) pairs."""
    steps = []
    for orient, h in oriented_steps:
        if orient not in ("fwd", "bwd"):
            raise ValueError("orientation must be 'fwd' or 'bwd'")
        steps.append(ChainStep(orient == "fwd", h))
    return HomotopyChain(tuple(steps))


def certify_chain_linkage(c: HomotopyChain, start: Callable, end: Callable,
                          probes: Sequence, tol: float = TOL_LINEAR,
                          dist: Callable = point_dist) -> Certificate:
    """Check that consecutive step faces agree on all probes and that the
    chain's outer faces match the declared start and end maps."""
    worst, witness = 0.0, None

    def update(d, tag):
        nonlocal worst, witness
        if d > worst:
            worst, witness = d, (tag,)

    for x in probes:
        update(dist(c.start(x), start(x)), "start")
        for k, (s0, s1) in enumerate(zip(c.steps, c.steps[1:])):
            update(dist(s0.end(x), s1.begin(x)), f"step {k}->{k + 1}")
        update(dist(c.end(x), end(x)), "end")
    return Certificate.from_violation("chain.linkage", worst, tol, witness)


@dataclass(frozen=True)
class VerticalChain:
    """Chain whose every step projects to a constant under the base map."""

    chain: HomotopyChain
    base_map: Callable
    anchor: Callable


def certify_vertical_chain(v: VerticalChain, probes: Sequence,
                           grid: SampleGrid = DEFAULT_GRID,
                           tol: float = TOL_LINEAR,
                           dist: Callable = point_dist,
                           end: Optional[Callable] = None) -> Certificate:
    """Linkage plus p-constancy: every step stays over p(anchor(x))."""
    link = certify_chain_linkage(v.chain, v.chain.start,
                                 end if end is not None else v.chain.end,
                                 probes, tol, dist)
    if not link.passed:
        return Certificate(FAIL, link.max_violation, "vertical.linkage",
                           tol, link.witness)
    p = v.base_map
    worst, witness = link.max_violation, None
    for x in probes:
        ref = p(v.anchor(x))
        for k, s in enumerate(v.chain.steps):
            ts = grid.params(s.homotopy.t_breakpoints)
            for t in ts:
                d = dist(p(s.homotopy(x, t)), ref)
                if d > worst:
                    worst, witness = d, (k, float(t))
    return Certificate.from_violation("vertical.p-drift", worst, tol, witness)


def chain_eval(c: HomotopyChain, x, u):
    """Evaluate a chain as one map of a single parameter u in [0, 1],
    subdividing equally among steps; backward steps run parameter-reversed."""
    u = frac(u)
    m = len(c.steps)
    k = min(int(u * m), m - 1)
    local = u * m - k
    s = c.steps[k]
    return s.homotopy(x, local if s.forward else 1 - local)


def chain_to_interval_homotopy(v: VerticalChain, a, b) -> DHomotopy:
    """Assemble a chain into a single homotopy on X x [a, b], subdividing
    equally among steps; backward steps are traversed parameter-reversed,
    which is sound only because every certified step is p-constant."""
    a, b = frac(a), frac(b)
    if a >= b:
        raise ValueError("need a < b")
    steps = v.chain.steps
    m = len(steps)

    def fn(x, u, c=v.chain):
        return chain_eval(c, x, u)

    bps = tuple(Fraction(k, m) for k in range(1, m))
    first = steps[0].homotopy
    return DHomotopy(fn, first.source, first.target, bps, chart=(a, b))


def lift_over_segment(witness, f_bar, phi_bar: DHomotopy, beta):
    """Homotopy lifting over a directed interval [a, b]: rescale to [0, 1],
    lift weakly, and rescale back.  beta names which end of the interval
    carries the given lift f_bar."""
    from .fibration import LiftProblem, weak_lift  # local: avoid cycle

    a, b = phi_bar.chart
    beta = frac(beta)
    if beta == a:
        alpha = 0
    elif beta == b:
        alpha = 1
    else:
        raise ValueError("beta must name an endpoint of the interval chart")
    canonical = DHomotopy(phi_bar.fn, phi_bar.source, phi_bar.target,
                          phi_bar.t_breakpoints)
    sol = weak_lift(witness, LiftProblem(f_bar, canonical, alpha))
    lifted = DHomotopy(sol.phi_prime.fn, sol.phi_prime.source,
                       sol.phi_prime.target, sol.phi_prime.t_breakpoints,
                       chart=(a, b))
    return lifted, sol.vertical
