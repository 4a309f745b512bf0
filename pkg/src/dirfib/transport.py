"""Fiber transport and fibre-homotopy-equivalence constructions.

Transport moves fibers along base paths; the pointed-path space
equivalence exchanges lower- and upper-anchored pointed paths; and the
improve/vertical-inverse pipeline upgrades an ordinary directed homotopy
equivalence over the base to a fibrewise one with vertical chains.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .dspace import (
    DEFAULT_GRID, TOL_LINEAR, Certificate, DMap, DPath, DSpace, SampleGrid,
    constant_path, derive_space, directed_interval, frac, opposite_path,
)
from .homotopy import (
    HALF, ChainStep, DHomotopy, HomotopyChain, VerticalChain,
    certify_chain_linkage, certify_vertical_chain, chain_eval, point_dist,
    smooth,
)
from .fibration import (
    FibrationWitness, LiftProblem, LiftingPair, PointedPath, epsilon_pair,
    lift_semistationary, opposite_fibration,
)

_FIBER_SLACK = 1e-7


@dataclass(frozen=True)
class FiberSpace:
    """The part of the total space sitting over one base point."""

    base_point: np.ndarray
    space: DSpace


def fiber_space(w: FibrationWitness, b, slack: float = _FIBER_SLACK
                ) -> FiberSpace:
    b = np.asarray(b, dtype=float).reshape(-1)
    sub = derive_space(
        "subspace", w.total,
        lambda e, w=w, b=b, slack=slack: point_dist(w.p(e), b) <= slack,
        f"fiber@{tuple(b)}")
    return FiberSpace(b, sub)


@dataclass(frozen=True)
class EquivalencePack:
    """A two-sided homotopy equivalence with explicit zigzag chains.

    forward_chain runs backward∘forward to the identity on the source;
    backward_chain runs forward∘backward to the identity on the target.
    When vertical is set, base_maps holds the projections over which each
    chain is claimed constant.
    """

    forward: Callable
    backward: Callable
    forward_chain: HomotopyChain
    backward_chain: HomotopyChain
    vertical: bool = False
    base_maps: tuple = ()
    dist: Callable = point_dist


def certify_equivalence_pack(pack: EquivalencePack, src_probes: Sequence,
                             tgt_probes: Sequence,
                             grid: SampleGrid = DEFAULT_GRID,
                             tol: float = TOL_LINEAR) -> Certificate:
    certs = []
    sides = [
        (pack.forward_chain, src_probes,
         lambda x: pack.backward(pack.forward(x)), 0),
        (pack.backward_chain, tgt_probes,
         lambda x: pack.forward(pack.backward(x)), 1),
    ]
    for c, probes, composite, i in sides:
        certs.append(certify_chain_linkage(c, composite, lambda x: x,
                                           probes, tol, dist=pack.dist))
        if pack.vertical and pack.base_maps:
            v = VerticalChain(c, pack.base_maps[i], lambda x: x)
            certs.append(certify_vertical_chain(v, probes, grid, tol,
                                                dist=pack.dist))
    return Certificate.combine(certs, "equivalence-pack")


def _memo_point_fn(fn: Callable) -> Callable:
    cache: dict = {}

    def wrapped(x, *rest):
        key = (np.asarray(x, dtype=float).tobytes(),
               tuple(float(r) for r in rest))
        if key not in cache:
            cache[key] = fn(x, *rest)
        return cache[key]
    return wrapped


# ---------------------------------------------------------------------------
# fiber transport along a base path


def fiber_transport(w: FibrationWitness, omega: DPath) -> EquivalencePack:
    """Equivalence between the fibers over the two ends of a base path.

    The path is replayed at triple speed between stationary thirds; the
    warped lifting pairs anchored at 1/3 and 2/3 carry fiber points across
    and supply the connecting homotopies, all of which stay over a single
    base point.
    """
    from .homotopy import shape_path
    om3 = shape_path("plateau3", omega)
    lift_lo = epsilon_pair(w, Fraction(1, 3)).lifts[0]
    lift_hi = epsilon_pair(w, Fraction(2, 3)).lifts[1]
    win_lo = (Fraction(0), Fraction(1, 3))
    win_hi = (Fraction(2, 3), Fraction(1))

    def pp_lo(e, path):
        return PointedPath(np.asarray(e, dtype=float).reshape(-1), path, 0,
                           win_lo)

    def pp_hi(e, path):
        return PointedPath(np.asarray(e, dtype=float).reshape(-1), path, 1,
                           win_hi)

    def fwd(e):
        return lift_lo(pp_lo(e, om3))(Fraction(1))

    def bwd(e):
        return lift_hi(pp_hi(e, om3))(Fraction(0))

    const_lo = constant_path(omega.space, omega(Fraction(0)))
    const_hi = constant_path(omega.space, omega(Fraction(1)))

    def phi(e, t):
        carried = lift_lo(pp_lo(e, om3))(t)
        tail = shape_path("theta_t", om3, t)
        return lift_hi(pp_hi(carried, tail))(Fraction(0))

    def psi(e, t):
        return lift_hi(pp_hi(e, const_lo))(t)

    def phi_p(ep, t):
        carried = lift_hi(pp_hi(ep, om3))(t)
        head = shape_path("theta_prime_t", om3, t)
        return lift_lo(pp_lo(carried, head))(Fraction(1))

    def psi_p(ep, t):
        return lift_lo(pp_lo(ep, const_hi))(t)

    src = fiber_space(w, omega(Fraction(0))).space
    tgt = fiber_space(w, omega(Fraction(1))).space
    mk = lambda fn, sp: DHomotopy(fn, sp, w.total, (HALF,))
    # backward∘forward >= phi(.,0) <= identity on the source fiber
    forward_chain = HomotopyChain((ChainStep(False, mk(phi, src)),
                                   ChainStep(True, mk(psi, src))))
    # forward∘backward sits at phi'(.,0); the chain walks it to the
    # identity through the t=1 slice
    backward_chain = HomotopyChain((ChainStep(True, mk(phi_p, tgt)),
                                    ChainStep(False, mk(psi_p, tgt))))
    return EquivalencePack(fwd, bwd, forward_chain, backward_chain,
                           vertical=True, base_maps=(w.p, w.p))


# ---------------------------------------------------------------------------
# pointed-path space equivalence


def pointed_path_dist(a: PointedPath, b: PointedPath,
                      grid: SampleGrid = SampleGrid(21)) -> float:
    d = point_dist(a.e, b.e)
    for t in grid.params(a.omega.breakpoints, b.omega.breakpoints):
        d = max(d, point_dist(a.omega(t), b.omega(t)))
    return d


def _bs_maps_and_chain(w: FibrationWitness):
    """Forward/backward maps between the lower- and upper-anchored pointed
    path spaces and the zigzag chain for backward∘forward on the lower one."""
    from .homotopy import shape_path
    lift = w.lifter.lift

    def fwd(pp: PointedPath) -> PointedPath:
        return PointedPath.semistationary(
            lift(pp)(Fraction(1)), shape_path("half_plus", pp.omega), 1)

    def bwd(pp: PointedPath) -> PointedPath:
        return PointedPath.semistationary(
            lift(pp)(Fraction(0)), shape_path("half_minus", pp.omega), 0)

    def phi(pp: PointedPath, t) -> PointedPath:
        scaled = shape_path("scale", pp.omega, t)
        plus = shape_path("half_plus", scaled)
        carried = lift(pp)(t)
        pt = lift(PointedPath.semistationary(carried, plus, 1))(Fraction(0))
        return PointedPath.semistationary(
            pt, shape_path("half_minus", plus), 0)

    def psi(pp: PointedPath, t) -> PointedPath:
        const = shape_path("scale", pp.omega, Fraction(0))
        pt = lift(PointedPath.semistationary(pp.e, const, 1))(t)
        return PointedPath.semistationary(
            pt, shape_path("scale", pp.omega, t), 0)

    chain = HomotopyChain((
        ChainStep(False, DHomotopy(phi, None, None, (HALF,))),
        ChainStep(True, DHomotopy(psi, None, None, (HALF,)))))
    return fwd, bwd, chain


def _flip_pointed(pp: PointedPath) -> PointedPath:
    return PointedPath.semistationary(pp.e, opposite_path(pp.omega),
                                      1 - pp.mode)


def bs_spaces_equivalence(w: FibrationWitness) -> EquivalencePack:
    """Equivalence between the two pointed-path spaces of the witness.

    The second zigzag is obtained by reflecting the first one through the
    opposite fibration: reversing paths exchanges the two anchoring modes
    and carries the lower-side chain to an upper-side chain."""
    fwd, bwd, chain_lo = _bs_maps_and_chain(w)
    w_op = opposite_fibration(w)
    _, _, chain_op = _bs_maps_and_chain(w_op)

    def reflect(h: DHomotopy) -> DHomotopy:
        return DHomotopy(lambda pp, t, h=h: _flip_pointed(h(_flip_pointed(pp),
                                                            t)),
                         None, None, h.t_breakpoints)

    chain_hi = HomotopyChain(tuple(ChainStep(s.forward, reflect(s.homotopy))
                                   for s in chain_op.steps))
    return EquivalencePack(fwd, bwd, chain_lo, chain_hi, vertical=False,
                           dist=pointed_path_dist)


# ---------------------------------------------------------------------------
# improving inverses over the base


def _compose_base(p: DMap, h: DHomotopy) -> DHomotopy:
    return DHomotopy(lambda x, t, p=p, h=h: p(h(x, t)), h.source, p.target,
                     h.t_breakpoints)


def improve_inverse(w: FibrationWitness, p_prime: DMap, f: Callable,
                    f_prime: DMap, chain: HomotopyChain
                    ) -> tuple:
    """Replace a homotopy inverse of f by one over the base.

    Each chain step pushes the current candidate along the lift of its
    base image: the step's known side carries the candidate, the strict
    lift of the smoothed base homotopy carries it to the other side.  The
    final candidate projects to p', and post-composing the lifted chain
    with f and splicing the input chain witnesses f∘(result) ≃ identity.
    """
    u = f_prime
    lifted = []
    for step in chain.steps:
        h = step.homotopy
        alpha = 0 if step.forward else 1
        side = "lower" if alpha == 0 else "upper"
        bar = smooth(_compose_base(p_prime, h), side)
        psi = lift_semistationary(w, LiftProblem(u, bar, alpha))
        u = DMap(_memo_point_fn(psi.face(1 - alpha).fn), psi.source,
                 psi.target)
        lifted.append(ChainStep(step.forward, psi))
    relation = HomotopyChain(tuple(lifted))
    out = relation.map_values(f).reversed().concat(chain)
    return u, out


def vertical_inverse(w: FibrationWitness, g: DMap, chain: HomotopyChain,
                     max_steps: int = 8) -> tuple:
    """Vertical inverse of a fibrewise self-map homotopic to the identity.

    Walking the chain from the identity end, each step's base image is
    lifted strictly starting from the candidate built so far; the final
    candidate g' projects like g.  The lifted chain (post-composed with g)
    spliced with the input chain joins g∘g' to the identity; lifting its
    base image once more, over the whole chain parameter at once, yields
    the three vertical slice homotopies certifying g∘g' ≃ id over p.

    Returns (g', vertical chain, plain chain g' ≃ id).
    """
    m = len(chain.steps)
    if m > max_steps:
        raise ValueError(f"chain depth {m} exceeds supported depth "
                         f"{max_steps}")
    p, E = w.p, w.total
    ident = DMap(lambda e: e, E, E)
    v = ident
    lifted = [None] * m
    for k in reversed(range(m)):
        step = chain.steps[k]
        a = 1 if step.forward else 0
        side = "upper" if a == 1 else "lower"
        bar = smooth(_compose_base(p, step.homotopy), side)
        psi = lift_semistationary(w, LiftProblem(v, bar, a))
        v = DMap(_memo_point_fn(psi.face(1 - a).fn), psi.source, psi.target)
        lifted[k] = ChainStep(step.forward, psi)
    g_prime = v
    to_identity = HomotopyChain(tuple(lifted))

    g_chain = HomotopyChain(tuple(
        ChainStep(s.forward,
                  DHomotopy(lambda x, t, s=s, g=g: g(s.homotopy(x, t)),
                            s.homotopy.source, E, s.homotopy.t_breakpoints))
        for s in to_identity.steps)).concat(chain)

    F_hat = _memo_point_fn(lambda e, s, c=g_chain: chain_eval(c, e, s))
    PF = _memo_point_fn(lambda e, s, p=p: p(F_hat(e, s)))

    X = derive_space("cylinder", E)

    def Phi_fn(x, t, PF=PF):
        e, s = x[:-1], frac(float(x[-1]))
        if t <= HALF:
            return PF(e, 2 * s * frac(t))
        return PF(e, s)

    Phi = DHomotopy(Phi_fn, X, w.base, (HALF,))
    F_map = DMap(lambda x: F_hat(x[:-1], frac(float(x[-1]))), X, E)
    lifted_Phi = lift_semistationary(w, LiftProblem(F_map, Phi, 1))
    big = _memo_point_fn(lambda e, s, t, h=lifted_Phi:
                         h(np.append(e, float(s)), t))

    slice_a = DHomotopy(lambda e, t: big(e, 0.0, t), E, E, (HALF,))
    slice_b = DHomotopy(lambda e, t: big(e, float(t), Fraction(0)), E, E)
    slice_c = DHomotopy(lambda e, t: big(e, 1.0, t), E, E, (HALF,))
    vertical = VerticalChain(
        HomotopyChain((ChainStep(False, slice_a), ChainStep(True, slice_b),
                       ChainStep(True, slice_c))),
        base_map=p, anchor=ident)
    return g_prime, vertical, to_identity


def dhe_to_fhe(w: FibrationWitness, w_prime: FibrationWitness, f: DMap,
               f_prime: DMap, chain_ffp: HomotopyChain,
               chain_fpf: HomotopyChain,
               max_steps: int = 64) -> EquivalencePack:
    """Upgrade a directed homotopy equivalence over the base to a fibre
    homotopy equivalence: improve the inverse to live over the base, take
    its vertical inverse on the target side, then repeat the pipeline on
    the source side and transfer the result through the vertical chains."""
    p, p_prime = w.p, w_prime.p
    E, E_prime = w.total, w_prime.total

    f_tilde, c1 = improve_inverse(w, p_prime, f, f_prime, chain_ffp)
    g = DMap(lambda e, f=f, ft=f_tilde: f(ft(e)), E_prime, E_prime)
    g_prime, vchain, _ = vertical_inverse(w_prime, g, c1, max_steps)
    f_bar = DMap(_memo_point_fn(
        lambda e, ft=f_tilde, gp=g_prime: ft(gp(e))), E_prime, E)
    # backward side done: f∘f_bar = g∘g' and vchain joins it to the
    # identity over p'
    backward_chain = vchain.chain

    # f_bar ≃ f' : pull the inverse chain through f_bar, then push the
    # vertical chain through f'
    c_a = chain_fpf.reversed().map_domain(f_bar, E_prime)
    c_b = vchain.chain.map_values(f_prime)
    bar_to_prime = c_a.concat(c_b)
    # f_bar∘f ≃ id on E
    c_full = bar_to_prime.map_domain(f, E).concat(chain_fpf)

    f_hat0, c2 = improve_inverse(w_prime, p, f_bar, f, c_full)
    g2 = DMap(lambda e, fb=f_bar, fh=f_hat0: fb(fh(e)), E, E)
    g2_prime, vchain2, _ = vertical_inverse(w, g2, c2, max_steps)
    f_hat = DMap(_memo_point_fn(
        lambda e, fh=f_hat0, g2p=g2_prime: fh(g2p(e))), E, E_prime)
    # vchain2 : f_bar∘f_hat -> id over p.  Transfer to f_bar∘f:
    #   V_a = backward_chain∘f_hat : f∘f_bar∘f_hat -> f_hat  (over p)
    #   V_b = vchain2∘f (values)   : f∘f_bar∘f_hat -> f      (over p)
    V_a = backward_chain.map_domain(f_hat, E)
    V_b = vchain2.chain.map_values(f)
    hat_to_f = V_a.reversed().concat(V_b)
    V_d = hat_to_f.map_values(f_bar)
    forward_chain = V_d.reversed().concat(vchain2.chain)
    return EquivalencePack(f, f_bar, forward_chain, backward_chain,
                           vertical=True, base_maps=(p, p_prime))


def shrinkable_check(w: FibrationWitness, s: DMap, chain: HomotopyChain,
                     total_probes: Sequence, base_probes: Sequence,
                     grid: SampleGrid = DEFAULT_GRID,
                     tol: float = TOL_LINEAR) -> Certificate:
    """A witness is shrinkable when its projection admits a section whose
    composite contracts vertically: run the fibrewise-equivalence pipeline
    against the identity fibration on the base and certify the result."""
    B = w.base
    section_err = max((point_dist(w.p(s(b)), b) for b in base_probes),
                      default=0.0)
    certs = [Certificate.from_violation("shrinkable.section", section_err,
                                        tol)]
    if section_err > tol:
        return Certificate.combine(certs, "shrinkable")
    ident_pair = LiftingPair({
        0: lambda pp, B=B: DPath(pp.omega.fn, pp.omega.breakpoints, B),
        1: lambda pp, B=B: DPath(pp.omega.fn, pp.omega.breakpoints, B)})
    w_id = FibrationWitness(DMap(lambda b: b, B, B), ident_pair,
                            provenance="identity")
    const = HomotopyChain((ChainStep(
        True, DHomotopy(lambda b, t: b, B, B)),))
    pack = dhe_to_fhe(w, w_id, w.p, s, const, chain)
    certs.append(certify_equivalence_pack(pack, total_probes, base_probes,
                                          grid, tol))
    return Certificate.combine(certs, "shrinkable")


# ---------------------------------------------------------------------------
# cylinder retraction


@dataclass(frozen=True)
class CylinderRetraction:
    R: DHomotopy
    pi: DMap
    rho: DMap
    r: DMap


def cylinder_retraction(w: FibrationWitness,
                        tol: float = TOL_LINEAR) -> tuple:
    """Retraction machinery for a fibration over a cylinder base.

    A lower-stationary base homotopy interpolates the interval coordinate
    of p(e) toward a free target parameter; its strict lift against the
    first projection gives R with p∘R(e, t) = (pi(e), t), the retraction
    r(e) = R(e, rho(e)), and reciprocal fibre equivalences between the two
    end slices."""
    base_B = w.metadata.get("cylinder_base")
    if base_B is None:
        raise ValueError("witness base does not decompose as a cylinder "
                         "(no 'cylinder_base' metadata)")
    p, E = w.p, w.total
    nb = base_B.dim
    pi = DMap(lambda e, p=p, nb=nb: p(e)[:nb], E, base_B)
    rho = DMap(lambda e, p=p, nb=nb: p(e)[nb:nb + 1], E,
               directed_interval(1))
    X = derive_space("cylinder", E)

    def phi_fn(x, t2, p=p, nb=nb):
        e, t1 = x[:-1], float(x[-1])
        pe = p(e)
        if t2 <= HALF:
            return pe
        u = float(t2)
        val = 2 * (1 - u) * float(pe[nb]) + (2 * u - 1) * t1
        return np.append(pe[:nb], val)

    phi = DHomotopy(phi_fn, X, w.base, (HALF,))
    pr1 = DMap(lambda x: x[:-1], X, E)
    phi_lift = lift_semistationary(w, LiftProblem(pr1, phi, 0))
    big = _memo_point_fn(lambda e, t1, t2, h=phi_lift:
                         h(np.append(e, float(t1)), t2))

    R = DHomotopy(lambda e, t: big(e, float(t), Fraction(1)), E, E, (HALF,))
    rho_of = lambda e: float(rho(e)[0])
    r = DMap(lambda e: R(e, rho_of(e)), E, E)
    kappa = DHomotopy(lambda e, t: big(e, rho_of(e), t), E, E, (HALF,))
    retraction = CylinderRetraction(R, pi, rho, r)

    slack = _FIBER_SLACK
    E0 = derive_space("subspace", E,
                      lambda e: abs(rho_of(e)) <= slack, "slice@0")
    E1 = derive_space("subspace", E,
                      lambda e: abs(rho_of(e) - 1) <= slack, "slice@1")
    h1 = DMap(lambda x: R(x, Fraction(1)), E0, E1)
    h0 = DMap(lambda y: R(y, Fraction(0)), E1, E0)

    slide0 = DHomotopy(lambda x, t: R(R(x, t), Fraction(0)), E0, E0, (HALF,))
    slide1 = DHomotopy(lambda y, t: R(R(y, t), Fraction(1)), E1, E1, (HALF,))
    r_kappa = DHomotopy(lambda e, t: r(kappa(e, t)), E, E, (HALF,))
    tail = (ChainStep(False, r_kappa), ChainStep(False, kappa))
    forward_chain = HomotopyChain((ChainStep(False, slide0),) + tail)
    backward_chain = HomotopyChain((ChainStep(True, slide1),) + tail)
    pack = EquivalencePack(h1, h0, forward_chain, backward_chain,
                           vertical=True, base_maps=(p, p))
    return retraction, pack
