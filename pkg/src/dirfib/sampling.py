"""Seeded random probe generation: piecewise-linear paths and pointed
probes for lifting-pair checks.  Knot parameters are exact rationals so
that breakpoints survive grid merging."""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .dspace import DPath, DSpace, as_point, frac
from .fibration import FibrationWitness, PointedPath
from .homotopy import shape_path


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_knot_params(rng: np.random.Generator, count: int,
                       denom: int = 64) -> list:
    """Distinct interior knot parameters k/denom, sorted."""
    if count <= 0:
        return []
    picks = rng.choice(np.arange(1, denom), size=min(count, denom - 1),
                       replace=False)
    return sorted(Fraction(int(k), denom) for k in picks)


def pl_path(space: DSpace, ts, vals) -> DPath:
    """Piecewise-linear interpolation through (ts[i], vals[i]) with exact
    rational breakpoints."""
    ts = [frac(t) for t in ts]
    vals = [np.asarray(v, dtype=float).reshape(-1) for v in vals]
    if len(ts) != len(vals) or len(ts) < 2:
        raise ValueError("need matching knot lists with at least two knots")

    def fn(t, ts=ts, vals=vals):
        t = frac(t)
        if t <= ts[0]:
            return vals[0]
        for a, b, va, vb in zip(ts, ts[1:], vals, vals[1:]):
            if t < b:
                lam = float((t - a) / (b - a))
                return (1 - lam) * va + lam * vb
        return vals[-1]

    return DPath(fn, tuple(ts[1:-1]), space)


def random_pl_path(rng: np.random.Generator, space: DSpace,
                   knots: int = 3, monotone: bool = True,
                   low: float = 0.0, high: float = 1.0,
                   decreasing: bool = False) -> DPath:
    """Random piecewise-linear path; monotone paths have coordinatewise
    nondecreasing knot values, as the coordinate-ordered spaces require.
    decreasing flips the knot order for time-reversed (opposite) spaces."""
    interior = random_knot_params(rng, knots)
    ts = [Fraction(0)] + interior + [Fraction(1)]
    n = space.dim
    if monotone:
        start = rng.uniform(low, (low + high) / 2, size=n)
        steps = rng.uniform(0, 1, size=(len(ts) - 1, n))
        total = steps.sum(axis=0)
        total[total == 0] = 1.0
        room = high - start
        cum = np.vstack([np.zeros(n), np.cumsum(steps, axis=0)])
        vals = start + cum / total * room * rng.uniform(0.3, 1.0)
    else:
        vals = rng.uniform(low, high, size=(len(ts), n))
    if decreasing:
        vals = vals[::-1]
    return pl_path(space, ts, list(vals))


def pointed_probe(rng: np.random.Generator, w: FibrationWitness,
                  section: Callable, mode: int, knots: int = 3,
                  monotone: bool = True, low: float = 0.0,
                  high: float = 1.0,
                  window: Optional[tuple] = None,
                  decreasing: bool = False) -> PointedPath:
    """Random pointed probe: a path parked at its anchored end for the
    required window, and a total-space point chosen by the section over
    the anchor value."""
    raw = random_pl_path(rng, w.base, knots, monotone, low, high,
                         decreasing)
    kind = "half_minus" if mode == 0 else "half_plus"
    om = shape_path(kind, raw)
    if window is not None:
        # re-park on a custom window [0, eps] or [eps, 1]
        lo, hi = frac(window[0]), frac(window[1])
        if mode == 0:
            span = 1 - hi
            om = DPath(lambda t, raw=raw, hi=hi, span=span:
                       raw(Fraction(0)) if t <= hi
                       else raw((frac(t) - hi) / span),
                       (hi,), w.base)
        else:
            om = DPath(lambda t, raw=raw, lo=lo:
                       raw(frac(t) / lo) if t <= lo else raw(Fraction(1)),
                       (lo,), w.base)
        anchor = om(Fraction(mode))
        e = section(anchor, rng)
        return PointedPath(np.asarray(e, dtype=float).reshape(-1), om, mode,
                           (Fraction(0), hi) if mode == 0 else (lo,
                                                                Fraction(1)))
    anchor = om(Fraction(mode))
    e = section(anchor, rng)
    return PointedPath.semistationary(e, om, mode)


def product_section(fiber: DSpace, low: float = 0.0, high: float = 1.0
                    ) -> Callable:
    def section(b, rng, fiber=fiber):
        return np.concatenate([np.asarray(b, dtype=float).reshape(-1),
                               rng.uniform(low, high, size=fiber.dim)])
    return section


def wedge_section(b, rng):
    """Fiber point over x = b[0] staying inside {x*y >= 0}."""
    x = float(np.asarray(b, dtype=float).reshape(-1)[0])
    if x > 0:
        y = rng.uniform(0.0, 2.0)
    elif x < 0:
        y = rng.uniform(-2.0, 0.0)
    else:
        y = rng.uniform(-2.0, 2.0)
    return as_point(x, y)
