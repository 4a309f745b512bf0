"""Lifting pairs, example fibrations, and derived lifts."""

from fractions import Fraction

import numpy as np
import pytest

from dirfib import (
    DHomotopy, DMap, DPath, LiftProblem, LiftingPair, PointedPath,
    SampleGrid, as_point, certify_lift_problem, certify_pointed_path,
    certify_vertical_chain, check_lifting_pair, constant_path, derived_lift,
    epsilon_pair, lift_semistationary, make_product_fibration,
    make_standard_space, make_wedge_fibration, max_structure_fibration,
    opposite_fibration, point_dist, pullback_fibration,
    semistationary_pair_from_lifter, shape_path, weak_lift,
    wedge_strict_infeasibility,
)
from dirfib.sampling import (
    pl_path, pointed_probe, product_section, rng_for, wedge_section,
)

I1 = make_standard_space("directed_In", 1)
F1 = make_standard_space("natural_In", 1)
GRID = SampleGrid(41)
PROD = make_product_fibration(I1, F1)


def halted(space):
    """A base path stationary on [0, 1/2], then rising; anchored at 0."""
    raw = pl_path(space, [0, 1], [[0.1], [0.9]])
    return shape_path("half_minus", raw)


def test_pointed_path_certification():
    om = halted(I1)
    good = PointedPath.semistationary(as_point(0.1, 0.4), om, 0)
    assert certify_pointed_path(good, PROD.p, GRID).passed
    off = PointedPath.semistationary(as_point(0.3, 0.4), om, 0)
    assert not certify_pointed_path(off, PROD.p, GRID).passed
    with pytest.raises(ValueError):
        certify_pointed_path(PointedPath(as_point(0.1, 0.4), om, 2),
                             PROD.p, GRID)


def test_product_pair_contracts():
    rng = rng_for(3)
    probes = [pointed_probe(rng, PROD, product_section(F1), mode)
              for mode in (0, 1, 0, 1, 0)]
    assert check_lifting_pair(PROD.lifter, PROD.p, probes, GRID).passed


def test_check_lifting_pair_rejects_bad_probe():
    om = halted(I1)
    bad = PointedPath.semistationary(as_point(0.9, 0.4), om, 0)
    with pytest.raises(ValueError):
        check_lifting_pair(PROD.lifter, PROD.p, [bad], GRID)


def test_check_lifting_pair_flags_projection_drift():
    om = halted(I1)
    stuck = LiftingPair({
        0: lambda pp: constant_path(PROD.total,
                                    np.asarray(pp.e, dtype=float)),
        1: lambda pp: constant_path(PROD.total,
                                    np.asarray(pp.e, dtype=float))})
    pp = PointedPath.semistationary(as_point(0.1, 0.4), om, 0)
    cert = check_lifting_pair(stuck, PROD.p, [pp], GRID)
    assert cert.verdict == "FAIL"
    # the path parks at omega(0) = 0.1 while the base reaches 0.9
    assert cert.max_violation == pytest.approx(0.8)


def test_strict_lift_of_semistationary_homotopy():
    om = halted(I1)
    phi = DHomotopy(lambda x, t, om=om: om(t), PROD.total, I1,
                    om.breakpoints)
    f0 = DMap(lambda x: np.array([om(0)[0], float(x[1])]),
              PROD.total, PROD.total)
    lifted = lift_semistationary(PROD, LiftProblem(f0, phi, 0),
                                 probes=[as_point(0.1, 0.4)], grid=GRID)
    x = as_point(0.1, 0.4)
    for t in GRID.params(lifted.t_breakpoints):
        got = lifted(x, t)
        assert point_dist(got, np.array([om(t)[0], 0.4])) < 1e-12


def test_strict_lift_rejects_unsmoothed_input():
    phi = DHomotopy(lambda x, t: np.full(1, float(t)), PROD.total, I1)
    f0 = DMap(lambda x: np.array([0.0, float(x[1])]), PROD.total, PROD.total)
    with pytest.raises(ValueError):
        lift_semistationary(PROD, LiftProblem(f0, phi, 0),
                            probes=[as_point(0.0, 0.5)], grid=GRID)


@pytest.mark.parametrize("alpha", [0, 1])
def test_weak_lift_projection_and_displacement(alpha):
    def base_h(x, t):
        return np.full(1, 0.2 + 0.6 * float(t))

    phi = DHomotopy(base_h, PROD.total, I1)
    anchor = base_h(None, alpha)[0]
    f0 = DMap(lambda x, a=anchor: np.array([a, float(x[1])]),
              PROD.total, PROD.total)
    sol = weak_lift(PROD, LiftProblem(f0, phi, alpha))
    x = as_point(anchor, 0.7)
    for t in GRID.params(sol.phi_prime.t_breakpoints):
        assert point_dist(PROD.p(sol.phi_prime(x, t)), base_h(x, t)) < 1e-12
    cert = certify_vertical_chain(sol.vertical, [x], GRID,
                                  end=sol.phi_prime.face(alpha))
    assert cert.passed


def test_wedge_diagonal_lift_and_displacement():
    w, bundled = make_wedge_fibration()
    assert bundled.verdict == "INFEASIBLE"
    B = w.base
    om = DPath(lambda t: as_point(max(0.0, 2 * float(t) - 1)),
               (Fraction(1, 2),), B)
    pp = PointedPath.semistationary(as_point(0.0, -1.0), om, 0)
    out = w.lifter.lift(pp)
    # published closed form: straighten to the origin, then run diagonally
    for t in GRID.params(out.breakpoints):
        v = max(0.0, 2 * float(t) - 1)
        expect = [0.0, -1.0 + 2 * float(t)] if t <= Fraction(1, 2) \
            else [v, v]
        assert point_dist(out(t), expect) < 1e-12


def test_wedge_infeasibility_verdicts():
    cert = wedge_strict_infeasibility()
    assert cert.verdict == "INFEASIBLE"
    t1, x1, y0, reason = cert.witness
    assert y0 == -1.0 and x1 > 0
    ok = wedge_strict_infeasibility(e0=as_point(0.0, 0.0))
    assert ok.verdict == "PASS"
    B = make_standard_space("directed_Rn", 1)
    flat = wedge_strict_infeasibility(H=constant_path(B, as_point(0.0)))
    assert flat.verdict == "PASS"


def test_pair_from_strict_solver_matches_product_closed_form():
    def solve(prob):
        return lift_semistationary(PROD, prob)

    pair = semistationary_pair_from_lifter(solve, PROD.total)
    rng = rng_for(11)
    for mode in (0, 1, 0, 1):
        pp = pointed_probe(rng, PROD, product_section(F1), mode)
        got = pair.lift(pp)
        want = PROD.lifter.lift(pp)
        for t in GRID.params(got.breakpoints, want.breakpoints):
            assert point_dist(got(t), want(t)) < 1e-9


def test_epsilon_pair_half_is_the_semistationary_pair():
    pair = epsilon_pair(PROD, Fraction(1, 2))
    rng = rng_for(5)
    for mode in (0, 1):
        pp = pointed_probe(rng, PROD, product_section(F1), mode)
        got = pair.lift(pp)
        want = PROD.lifter.lift(pp)
        for t in GRID.params(got.breakpoints, want.breakpoints):
            assert point_dist(got(t), want(t)) < 1e-12


def test_epsilon_pair_contracts_on_eps_windows():
    eps = Fraction(1, 4)
    pair = epsilon_pair(PROD, eps)
    rng = rng_for(6)
    for mode in (0, 1):
        window = (0, eps) if mode == 0 else (eps, 1)
        probes = [pointed_probe(rng, PROD, product_section(F1), mode,
                                window=window) for _ in range(4)]
        assert check_lifting_pair(pair, PROD.p, probes, GRID).passed
    with pytest.raises(ValueError):
        epsilon_pair(PROD, 1)


def test_max_structure_accepts_exactly_base_monotone_paths():
    plain = make_standard_space("directed_Rn", 2)
    w = max_structure_fibration(
        plain.carrier, lambda pt: pt[:1],
        make_standard_space("directed_Rn", 1),
        lambda pp: DPath(lambda t, pp=pp: np.array(
            [pp.omega(t)[0], float(pp.e[1])]),
            tuple(pp.omega.breakpoints), None))
    # second coordinate decreases: fine upstairs, rejected by the plain order
    path = DPath(lambda t: as_point(float(t), 1 - float(t)), (), w.total)
    assert w.total.violation([(t, path(t)) for t in GRID.params()]) == 0.0
    assert plain.violation([(t, path(t)) for t in GRID.params()]) > 0.0
    rng = rng_for(8)
    probes = [pointed_probe(rng, w, product_section(F1, -1, 1), mode)
              for mode in (0, 1)]
    assert check_lifting_pair(w.lifter, w.p, probes, GRID).passed


def test_pullback_pairs_base_path_with_mapped_lift():
    square = DMap(lambda b: np.asarray(b, dtype=float) ** 2, I1, I1)
    w = pullback_fibration(PROD, square)
    om = halted(I1)
    e = np.array([0.1, 0.1 ** 2, 0.6])
    pp = PointedPath.semistationary(e, om, 0)
    out = w.lifter.lift(pp)
    for t in GRID.params(out.breakpoints):
        b = om(t)[0]
        assert point_dist(out(t), [b, b * b, 0.6]) < 1e-12
    assert point_dist(out(0), e) < 1e-12


def test_opposite_fibration_round_trip():
    w_op = opposite_fibration(PROD)
    raw = pl_path(I1, [0, 1], [[0.8], [0.2]])  # decreasing: directed in op
    om = shape_path("half_minus", raw)
    pp = PointedPath.semistationary(as_point(0.8, 0.3), om, 0)
    out = w_op.lifter.lift(pp)
    for t in GRID.params(out.breakpoints):
        assert point_dist(out(t), [om(t)[0], 0.3]) < 1e-12
    back = opposite_fibration(w_op)
    out2 = back.lifter.lift(PointedPath.semistationary(
        as_point(0.2, 0.3), shape_path("half_minus",
                                       pl_path(I1, [0, 1], [[0.2], [0.8]])),
        0))
    assert point_dist(out2(1), [0.8, 0.3]) < 1e-12


def test_lift_problem_face_certificate():
    phi = DHomotopy(lambda x, t: np.full(1, float(t)), PROD.total, I1)
    good = DMap(lambda x: np.array([0.0, float(x[1])]), PROD.total,
                PROD.total)
    bad = DMap(lambda x: np.array([0.5, float(x[1])]), PROD.total,
               PROD.total)
    probes = [as_point(0.0, 0.3)]
    assert certify_lift_problem(PROD.p, LiftProblem(good, phi, 0),
                                probes).passed
    assert not certify_lift_problem(PROD.p, LiftProblem(bad, phi, 0),
                                    probes).passed
    with pytest.raises(ValueError):
        LiftProblem(good, phi, 2)


def test_transport_moves_a_lift_to_the_other_face():
    phi = DHomotopy(lambda x, t: np.full(1, float(t)), PROD.total, I1)
    f0 = DMap(lambda x: np.array([0.0, float(x[1])]), PROD.total, PROD.total)
    f1, sol = derived_lift("transport", PROD, f0, phi, 0)
    x = as_point(0.0, 0.45)
    assert point_dist(f1(x), [1.0, 0.45]) < 1e-12


def test_reversed_lift_projects_onto_the_mirrored_base():
    def base_h(x, t):
        return np.full(1, 1 - 0.5 * float(t))

    phi = DHomotopy(base_h, PROD.total, I1)
    f0 = DMap(lambda x: np.array([1.0, float(x[1])]), PROD.total, PROD.total)
    sol = derived_lift("reversed", PROD, LiftProblem(f0, phi, 0))
    x = as_point(1.0, 0.25)
    for t in GRID.params(sol.phi_prime.t_breakpoints):
        assert point_dist(PROD.p(sol.phi_prime(x, t)), base_h(x, t)) < 1e-12


def test_derived_lift_rejects_unknown_kind():
    with pytest.raises(ValueError):
        derived_lift("sideways")
