"""Fibration witnesses: lifting pairs, example fibrations, transformers.

A directed weak fibration is always carried as data: a map p together with
a semistationary lifting pair whose contracts are certified on probes.
Lifters consume pointed paths (a point of the total space over one end of
a base path that is stationary there) and emit directed paths upstairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .dspace import (
    DEFAULT_GRID, FAIL, INFEASIBLE, PASS, TOL_LINEAR, Certificate, DMap,
    DPath, DSpace, SampleGrid, as_point, certify_directed_path, derive_space,
    frac, make_standard_space, opposite_path, wedge_total_space,
)
from .homotopy import (
    DHomotopy, ChainStep, HomotopyChain, VerticalChain, is_semistationary,
    point_dist, smooth, theta_warp, HALF,
)

FIRST_HALF = (Fraction(0), HALF)
SECOND_HALF = (HALF, Fraction(1))


@dataclass(frozen=True)
class PointedPath:
    """A total-space point e over one end of a base path omega.

    mode names the anchored end: omega(mode) = p(e).  window, when set,
    is an interval on which omega is stationary at p(e); semistationary
    lifters require window (0, 1/2) for mode 0 and (1/2, 1) for mode 1.
    """

    e: np.ndarray
    omega: DPath
    mode: int
    window: Optional[tuple] = None

    @staticmethod
    def semistationary(e, omega: DPath, mode: int) -> "PointedPath":
        return PointedPath(np.asarray(e, dtype=float).reshape(-1), omega,
                           mode, FIRST_HALF if mode == 0 else SECOND_HALF)


def certify_pointed_path(pp: PointedPath, p: DMap,
                         grid: SampleGrid = DEFAULT_GRID,
                         tol: float = TOL_LINEAR) -> Certificate:
    """Endpoint anchoring and (if declared) window stationarity."""
    if pp.mode not in (0, 1):
        raise ValueError("pointed path mode must be 0 or 1")
    base_pt = p(pp.e)
    worst = point_dist(pp.omega(Fraction(pp.mode)), base_pt)
    witness = (float(pp.mode),) if worst > tol else None
    if pp.window is not None:
        lo, hi = frac(pp.window[0]), frac(pp.window[1])
        for t in grid.params(pp.omega.breakpoints, (lo, hi)):
            if lo <= t <= hi:
                d = point_dist(pp.omega(t), base_pt)
                if d > worst:
                    worst, witness = d, (float(t),)
    return Certificate.from_violation("pointed-path.anchor", worst, tol,
                                      witness)


@dataclass(frozen=True)
class LiftingPair:
    """Both alpha-components of a lifting pair, plus its flavor.

    lifts maps mode (0 or 1) to a function PointedPath -> DPath; the seam
    breakpoints are parameters at which every output may switch formula.
    """

    lifts: dict
    flavor: str = "semistationary"
    seam_breakpoints: tuple = (HALF,)

    def lift(self, pp: PointedPath) -> DPath:
        out = self.lifts[pp.mode](pp)
        bps = tuple(sorted(set(out.breakpoints) | set(self.seam_breakpoints)))
        return DPath(out.fn, bps, out.space)


@dataclass(frozen=True)
class FibrationWitness:
    p: DMap
    lifter: LiftingPair
    provenance: str = ""
    metadata: dict = field(default_factory=dict)

    @property
    def total(self) -> DSpace:
        return self.p.source

    @property
    def base(self) -> DSpace:
        return self.p.target


@dataclass(frozen=True)
class LiftProblem:
    """Lift f' of the alpha-face of a base homotopy phi through p."""

    f_prime: DMap
    phi: DHomotopy
    alpha: int

    def __post_init__(self):
        if self.alpha not in (0, 1):
            raise ValueError("alpha must be 0 or 1")


@dataclass(frozen=True)
class LiftSolution:
    phi_prime: DHomotopy
    vertical: VerticalChain


def certify_lift_problem(p: DMap, prob: LiftProblem, probes: Sequence,
                         tol: float = TOL_LINEAR) -> Certificate:
    """The alpha-face of phi must equal p composed with f' on probes."""
    worst, witness = 0.0, None
    for x in probes:
        d = point_dist(prob.phi(x, Fraction(prob.alpha)), p(prob.f_prime(x)))
        if d > worst:
            worst, witness = d, (tuple(np.asarray(x, dtype=float).ravel()),)
    return Certificate.from_violation("lift-problem.face", worst, tol,
                                      witness)


def check_lifting_pair(pair: LiftingPair, p: DMap,
                       probes: Sequence[PointedPath],
                       grid: SampleGrid = DEFAULT_GRID,
                       tol: float = TOL_LINEAR) -> Certificate:
    """Endpoint contract, projection contract, and directedness of every
    lifted probe path."""
    certs = []
    for idx, pp in enumerate(probes):
        pre = certify_pointed_path(pp, p, grid, tol)
        if not pre.passed:
            raise ValueError(
                f"probe {idx} violates the pointed-path invariant "
                f"(violation {pre.max_violation:.3e} at {pre.witness})")
        out = pair.lift(pp)
        end_err = point_dist(out(Fraction(pp.mode)), pp.e)
        certs.append(Certificate.from_violation(
            f"lifting-pair.endpoint[{idx}]", end_err, tol, (pp.mode,)))
        proj_worst, proj_wit = 0.0, None
        for t in grid.params(out.breakpoints, pp.omega.breakpoints):
            d = point_dist(p(out(t)), pp.omega(t))
            if d > proj_worst:
                proj_worst, proj_wit = d, (float(t),)
        certs.append(Certificate.from_violation(
            f"lifting-pair.projection[{idx}]", proj_worst, tol, proj_wit))
        certs.append(certify_directed_path(p.source, out, grid, tol))
    return Certificate.combine(certs, "lifting-pair.contracts")


# ---------------------------------------------------------------------------
# lifting constructions


def _path_of_phi(prob: LiftProblem, x, base: DSpace) -> DPath:
    return DPath(lambda t, prob=prob, x=x: prob.phi(x, t),
                 prob.phi.t_breakpoints, base)


def lift_semistationary(w: FibrationWitness, prob: LiftProblem,
                        probes: Optional[Sequence] = None,
                        grid: SampleGrid = DEFAULT_GRID,
                        tol: float = TOL_LINEAR) -> DHomotopy:
    """Strict lift of a semistationary homotopy: apply the lifting pair
    pointwise, phi'(x, t) = lift(f'(x), phi(x, .))(t)."""
    if probes is not None:
        side = "lower" if prob.alpha == 0 else "upper"
        cert = is_semistationary(prob.phi, side, probes, grid, tol)
        if not cert.passed:
            raise ValueError(
                f"phi is not {side}-semistationary "
                f"(violation {cert.max_violation:.3e}); use weak_lift")

    def fn(x, t, w=w, prob=prob):
        pp = PointedPath.semistationary(prob.f_prime(x),
                                        _path_of_phi(prob, x, w.base),
                                        prob.alpha)
        return w.lifter.lift(pp)(t)

    bps = tuple(sorted(set(prob.phi.t_breakpoints)
                       | set(w.lifter.seam_breakpoints)))
    return DHomotopy(fn, prob.f_prime.source, w.total, bps)


def weak_lift(w: FibrationWitness, prob: LiftProblem) -> LiftSolution:
    """Weak homotopy lifting: smooth phi to a semistationary homotopy,
    lift that strictly, and rewarp so the projection contract holds for
    the original phi.  The displaced alpha-face comes with a one-step
    vertical chain back to f'."""
    alpha = prob.alpha
    side = "lower" if alpha == 0 else "upper"
    phi_bar = smooth(prob.phi, side)
    bar_lift = lift_semistationary(w, LiftProblem(prob.f_prime, phi_bar,
                                                  alpha))
    B = bar_lift.t_breakpoints
    if alpha == 0:
        # moving half of the smoothed lift is [1/2,1]; the frozen half is
        # the vertical displacement
        prime = DHomotopy(lambda x, t, h=bar_lift: h(x, (1 + frac(t)) / 2),
                          prob.f_prime.source, w.total,
                          tuple(sorted({2 * b - 1 for b in B if b >= HALF})))
        disp = DHomotopy(lambda x, t, h=bar_lift: h(x, frac(t) / 2),
                         prob.f_prime.source, w.total,
                         tuple(sorted({2 * b for b in B if b <= HALF})))
        # disp runs f' -> phi'(.,0); the chain goes from the lifted face
        # back to f', hence a backward step
        step = ChainStep(False, disp)
    else:
        prime = DHomotopy(lambda x, t, h=bar_lift: h(x, frac(t) / 2),
                          prob.f_prime.source, w.total,
                          tuple(sorted({2 * b for b in B if b <= HALF})))
        disp = DHomotopy(lambda x, t, h=bar_lift: h(x, (1 + frac(t)) / 2),
                         prob.f_prime.source, w.total,
                         tuple(sorted({2 * b - 1 for b in B if b >= HALF})))
        step = ChainStep(True, disp)
    vertical = VerticalChain(HomotopyChain((step,)),
                             base_map=w.p, anchor=prob.f_prime)
    return LiftSolution(prime, vertical)


_SINGLETON = make_standard_space("natural_Rn", 1)
STAR = np.zeros(1)


def semistationary_pair_from_lifter(strict_lift: Callable,
                                    total: DSpace) -> LiftingPair:
    """Package a strict solver of semistationary lift problems as a
    lifting pair, by posing each (e, omega) as a problem over a one-point
    domain and reading off the lifted path."""

    def make(alpha: int):
        def lift(pp: PointedPath, alpha=alpha) -> DPath:
            f_prime = DMap(lambda x, e=pp.e: e, _SINGLETON, total)
            phi = DHomotopy(lambda x, t, om=pp.omega: om(t),
                            _SINGLETON, pp.omega.space,
                            tuple(pp.omega.breakpoints))
            sol = strict_lift(LiftProblem(f_prime, phi, alpha))
            return DPath(lambda t, sol=sol: sol(STAR, t),
                         sol.t_breakpoints, total)
        return lift

    return LiftingPair({0: make(0), 1: make(1)})


def epsilon_pair(w: FibrationWitness, eps) -> LiftingPair:
    """Warped lifting pair: anchored paths stationary on [0, eps] (mode 0)
    or [eps, 1] (mode 1) are lifted by warping to the semistationary case
    and unwarping the result."""
    e = frac(eps)
    if not (0 < e < 1):
        raise ValueError("epsilon must lie strictly in (0, 1)")
    warp = theta_warp(e)

    def make(alpha: int):
        def lift(pp: PointedPath, alpha=alpha) -> DPath:
            om = pp.omega
            warped = DPath(lambda t, om=om, w=warp: om(w.forward(t)),
                           (HALF,), om.space)
            inner = w.lifter.lift(
                PointedPath.semistationary(pp.e, warped, alpha))
            bps = tuple(sorted({frac(e)}
                               | {warp.forward(b) for b in inner.breakpoints}))
            return DPath(lambda t, inner=inner, w=warp: inner(w.inverse(t)),
                         bps, inner.space)
        return lift

    return LiftingPair({0: make(0), 1: make(1)}, flavor="epsilon",
                       seam_breakpoints=(e,))


# ---------------------------------------------------------------------------
# example fibrations


def make_product_fibration(B: DSpace, F: DSpace) -> FibrationWitness:
    """Projection of a product onto its first factor; the lift carries the
    fiber coordinate along unchanged."""
    E = derive_space("product", B, F)
    nb = B.dim
    p = DMap(lambda pt, nb=nb: pt[:nb], E, B)

    def lift(pp: PointedPath) -> DPath:
        fiber = np.asarray(pp.e, dtype=float)[nb:]
        return DPath(lambda t, om=pp.omega, fiber=fiber:
                     np.concatenate([om(t), fiber]),
                     tuple(pp.omega.breakpoints), E)

    pair = LiftingPair({0: lift, 1: lift})
    return FibrationWitness(p, pair, provenance="product",
                            metadata={"base": B, "fiber": F})


def _wedge_strict_solver(E: DSpace):
    def solve(prob: LiftProblem) -> DHomotopy:
        alpha = prob.alpha

        def fn(x, t, prob=prob, alpha=alpha):
            e = prob.f_prime(x)
            x0, y0 = float(e[0]), float(e[1])
            if alpha == 0:
                if t <= HALF:
                    # straighten the fiber linearly onto the diagonal
                    # during the stationary half
                    s = 2 * float(t)
                    return as_point(x0, (1 - s) * y0 + s * x0)
                v = float(prob.phi(x, t)[0])
                return as_point(v, v)
            if t <= HALF:
                v = float(prob.phi(x, t)[0])
                return as_point(v, v)
            s = 2 * float(t) - 1
            return as_point(x0, (1 - s) * x0 + s * y0)

        bps = tuple(sorted({HALF} | set(prob.phi.t_breakpoints)))
        return DHomotopy(fn, prob.f_prime.source, E, bps)
    return solve


def make_wedge_fibration() -> tuple:
    """First-factor projection of the wedge {(x, y) : x*y >= 0} in the
    product of the directed line with the natural line.  The witness's
    lifter straightens onto the diagonal during the stationary half and
    then follows the base path diagonally; the bundled certificate records
    that strict lifting (no straightening allowed) is infeasible."""
    E = wedge_total_space()
    B = make_standard_space("directed_Rn", 1)
    p = DMap(lambda pt: pt[:1], E, B)
    pair = semistationary_pair_from_lifter(_wedge_strict_solver(E), E)
    witness = FibrationWitness(p, pair, provenance="wedge",
                               metadata={"base": B})
    cert = wedge_strict_infeasibility()
    return witness, cert


def wedge_strict_infeasibility(e0=None, H: Optional[DPath] = None,
                               grid: SampleGrid = DEFAULT_GRID,
                               tol: float = TOL_LINEAR) -> Certificate:
    """Interval reasoning showing the wedge projection admits no strict
    lift from a start point strictly below the axis along a base path
    that leaves 0 immediately: any sampled lift must jump the fiber from
    y < 0 to y >= 0 across consecutive grid points while x > 0 forbids
    intermediate values, so no directed path in the carrier connects
    them.  Inputs outside this pattern get a no-contradiction verdict."""
    B = make_standard_space("directed_Rn", 1)
    if e0 is None:
        e0 = as_point(0.0, -1.0)
    e0 = np.asarray(e0, dtype=float).reshape(-1)
    if H is None:
        H = DPath(lambda t: as_point(float(t)), (), B)
    y0 = float(e0[1])
    ts = [t for t in grid.params(H.breakpoints) if t > 0]
    if y0 < -tol and abs(float(H(0)[0]) - float(e0[0])) <= tol \
            and float(e0[0]) <= tol and all(float(H(t)[0]) > tol for t in ts):
        t1 = ts[0]
        witness = (float(t1), float(H(t1)[0]), y0,
                   "x(t)>0 forces y(t)>=0 but y(0)<0")
        return Certificate(INFEASIBLE, abs(y0), "wedge.strict-lift", tol,
                           witness)
    return Certificate(PASS, 0.0, "wedge.strict-lift.no-contradiction", tol)


def max_structure_fibration(carrier, p_fn: Callable, dB: DSpace,
                            lifter_fn: Callable,
                            provenance: str = "max-structure"
                            ) -> FibrationWitness:
    """Total space with the maximal directedness compatible with p: a
    sampled path upstairs is accepted iff its p-image is accepted by the
    base.  Any supplied lifter with correct endpoint/projection behavior
    is automatically directed; contracts are still certified, never
    assumed."""
    def violation(samples, p_fn=p_fn, dB=dB):
        mapped = [(t, np.asarray(p_fn(np.asarray(pt, dtype=float)),
                                 dtype=float).reshape(-1))
                  for t, pt in samples]
        return dB.violation(mapped)

    E = DSpace(carrier, violation, "max-structure")
    p = DMap(p_fn, E, dB)
    pair = LiftingPair({0: lifter_fn, 1: lifter_fn})
    return FibrationWitness(p, pair, provenance=provenance)


# ---------------------------------------------------------------------------
# fibration transformers


def pullback_fibration(w: FibrationWitness, f: DMap,
                       tol: float = TOL_LINEAR) -> FibrationWitness:
    """Pullback along f: total space {(b', e) : f(b') = p(e)} inside the
    product, projecting to the first factor; lifts pair the base path with
    the original witness's lift of its f-image."""
    if f.target is not w.base and f.target.carrier.label \
            != w.base.carrier.label:
        raise ValueError("pullback map must land in the witness's base")
    Bp = f.source
    nb = Bp.dim
    ambient = derive_space("product", Bp, w.total)
    E_f = derive_space(
        "subspace", ambient,
        lambda pt, f=f, w=w, nb=nb, tol=tol:
            point_dist(f(pt[:nb]), w.p(pt[nb:])) <= tol,
        f"pullback({w.total.carrier.label})")
    p_f = DMap(lambda pt, nb=nb: pt[:nb], E_f, Bp)

    def make(alpha: int):
        def lift(pp: PointedPath, alpha=alpha) -> DPath:
            e_inner = np.asarray(pp.e, dtype=float)[nb:]
            mapped = DPath(lambda t, f=f, om=pp.omega: f(om(t)),
                           tuple(pp.omega.breakpoints)
                           + tuple(f.breakpoint_hint), w.base)
            inner = w.lifter.lift(
                PointedPath.semistationary(e_inner, mapped, alpha))
            bps = tuple(sorted(set(pp.omega.breakpoints)
                               | set(inner.breakpoints)))
            return DPath(lambda t, om=pp.omega, inner=inner:
                         np.concatenate([om(t), inner(t)]), bps, E_f)
        return lift

    pair = LiftingPair({0: make(0), 1: make(1)},
                       seam_breakpoints=w.lifter.seam_breakpoints)
    return FibrationWitness(p_f, pair,
                            provenance=f"pullback({w.provenance})",
                            metadata={"base_witness": w, "along": f})


def opposite_fibration(w: FibrationWitness) -> FibrationWitness:
    """Time reversal: opposite total and base spaces, lifter obtained by
    reversing the path, lifting at the other end, and reversing back."""
    E_op = derive_space("opposite", w.total)
    B_op = derive_space("opposite", w.base)
    p_op = DMap(w.p.fn, E_op, B_op, w.p.breakpoint_hint)

    def make(alpha: int):
        def lift(pp: PointedPath, alpha=alpha) -> DPath:
            rev = opposite_path(pp.omega)
            inner = w.lifter.lift(
                PointedPath.semistationary(pp.e, rev, 1 - alpha))
            bps = tuple(sorted(1 - b for b in inner.breakpoints))
            return DPath(lambda t, inner=inner: inner(1 - frac(t)), bps,
                         E_op)
        return lift

    seams = tuple(sorted(1 - frac(b) for b in w.lifter.seam_breakpoints))
    pair = LiftingPair({0: make(0), 1: make(1)}, seam_breakpoints=seams)
    return FibrationWitness(p_op, pair,
                            provenance=f"opposite({w.provenance})",
                            metadata={"base_witness": w})


# ---------------------------------------------------------------------------
# derived lifts


def transport_lift(w: FibrationWitness, f0_lift: DMap, phi: DHomotopy,
                   alpha: int):
    """Move a lift across a base homotopy: lift phi weakly from f0's lift
    and read off the opposite face, which lifts the other face of phi."""
    sol = weak_lift(w, LiftProblem(f0_lift, phi, alpha))
    return sol.phi_prime.face(1 - alpha), sol


def reversed_lift(w: FibrationWitness, prob: LiftProblem) -> LiftSolution:
    """Lift a problem posed on the reversed cylinder by conjugating with
    t -> 1 - t on both the data and the solution."""
    mirrored = DHomotopy(lambda x, t, h=prob.phi: h(x, 1 - frac(t)),
                         prob.phi.source, prob.phi.target,
                         tuple(sorted(1 - b for b in prob.phi.t_breakpoints)))
    sol = weak_lift(w, LiftProblem(prob.f_prime, mirrored, 1 - prob.alpha))
    psi_prime = DHomotopy(lambda x, t, h=sol.phi_prime: h(x, 1 - frac(t)),
                          sol.phi_prime.source, sol.phi_prime.target,
                          tuple(sorted(1 - b
                                       for b in sol.phi_prime.t_breakpoints)))
    return LiftSolution(psi_prime, sol.vertical)


def dominated_lift(w_dom: FibrationWitness, p: DMap, f: DMap, g: DMap,
                   dom_chain: VerticalChain,
                   prob: LiftProblem) -> LiftSolution:
    """Lift through a dominating fibration: push the initial lift along f,
    lift there, pull the result back with g, and splice the domination
    chain onto the displacement chain."""
    pushed = DMap(lambda x, f=f, fp=prob.f_prime: f(fp(x)),
                  prob.f_prime.source, w_dom.total)
    sol = weak_lift(w_dom, LiftProblem(pushed, prob.phi, prob.alpha))
    phi_prime = DHomotopy(lambda x, t, g=g, h=sol.phi_prime: g(h(x, t)),
                          sol.phi_prime.source, p.source,
                          sol.phi_prime.t_breakpoints)
    lifted_leg = sol.vertical.chain.map_values(g)
    dom_leg = dom_chain.chain.map_domain(prob.f_prime,
                                         prob.f_prime.source)
    vertical = VerticalChain(lifted_leg.concat(dom_leg), base_map=p,
                             anchor=prob.f_prime)
    return LiftSolution(phi_prime, vertical)


def derived_lift(kind: str, *args, **kwargs):
    if kind == "dominated":
        return dominated_lift(*args, **kwargs)
    if kind == "transport":
        return transport_lift(*args, **kwargs)
    if kind == "reversed":
        return reversed_lift(*args, **kwargs)
    raise ValueError(f"unknown derived lift kind: {kind}")
