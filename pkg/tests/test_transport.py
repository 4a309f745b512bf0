"""Fiber transport, pointed-path equivalence, and the fibrewise pipeline."""

from fractions import Fraction

import numpy as np
import pytest

from dirfib import (
    ChainStep, DHomotopy, DMap, DPath, FibrationWitness, HomotopyChain,
    PointedPath, SampleGrid, as_point, bs_spaces_equivalence,
    certify_equivalence_pack, certify_vertical_chain, constant_path,
    cylinder_retraction, derive_space, dhe_to_fhe, directed_interval,
    fiber_space, fiber_transport, improve_inverse, make_product_fibration,
    make_standard_space, point_dist, pointed_path_dist, shape_path,
    shrinkable_check, vertical_inverse,
)
from dirfib.sampling import pl_path, pointed_probe, product_section, rng_for

I1 = make_standard_space("directed_In", 1)
F1 = make_standard_space("natural_In", 1)
GRID = SampleGrid(21)
PROD = make_product_fibration(I1, F1)


def test_fiber_space_membership():
    fib = fiber_space(PROD, as_point(0.25))
    assert fib.space.carrier.admits(as_point(0.25, 0.8))
    assert not fib.space.carrier.admits(as_point(0.5, 0.8))


def test_fiber_transport_carries_fibers_across_the_base_path():
    omega = DPath(lambda t: as_point(float(t)), (), I1)
    pack = fiber_transport(PROD, omega)
    for c in (0.0, 0.3, 1.0):
        assert point_dist(pack.forward(as_point(0.0, c)), [1.0, c]) < 1e-9
        assert point_dist(pack.backward(as_point(1.0, c)), [0.0, c]) < 1e-9
    rng = rng_for(2)
    src = [np.array([0.0, rng.uniform()]) for _ in range(4)]
    tgt = [np.array([1.0, rng.uniform()]) for _ in range(4)]
    assert certify_equivalence_pack(pack, src, tgt, GRID).passed


def test_fiber_transport_over_a_constant_path_is_the_identity():
    omega = constant_path(I1, as_point(0.4))
    pack = fiber_transport(PROD, omega)
    e = as_point(0.4, 0.7)
    assert point_dist(pack.forward(e), e) < 1e-9
    assert point_dist(pack.backward(e), e) < 1e-9


def test_pointed_path_distance():
    om = shape_path("half_minus", pl_path(I1, [0, 1], [[0.1], [0.9]]))
    a = PointedPath.semistationary(as_point(0.1, 0.4), om, 0)
    assert pointed_path_dist(a, a) == 0.0
    b = PointedPath.semistationary(as_point(0.1, 0.9), om, 0)
    assert pointed_path_dist(a, b) == pytest.approx(0.5)


def test_pointed_path_equivalence_swaps_anchoring_modes():
    pack = bs_spaces_equivalence(PROD)
    rng = rng_for(4)
    src = [pointed_probe(rng, PROD, product_section(F1), 0)
           for _ in range(4)]
    tgt = [pointed_probe(rng, PROD, product_section(F1), 1)
           for _ in range(4)]
    out = pack.forward(src[0])
    assert out.mode == 1
    # the carried point sits over the far end of the original path
    assert point_dist(PROD.p(out.e), src[0].omega(1)) < 1e-9
    back = pack.backward(out)
    assert back.mode == 0
    assert certify_equivalence_pack(pack, src, tgt, GRID).passed


def test_improve_inverse_moves_the_candidate_over_the_base():
    # f is the identity; its declared inverse projects to a wrong base
    # point, and one homotopy step witnesses f∘f' ≃ id
    f = DMap(lambda e: e, PROD.total, PROD.total)
    f_prime = DMap(lambda e: np.array([0.5, float(e[1])]),
                   PROD.total, PROD.total)
    h = DHomotopy(lambda e, t: np.array(
        [(1 - float(t)) * 0.5 + float(t) * float(e[0]), float(e[1])]),
        PROD.total, PROD.total)
    c = HomotopyChain((ChainStep(True, h),))
    u, out_chain = improve_inverse(PROD, PROD.p, f, f_prime, c)
    probes = [as_point(0.2, 0.3), as_point(0.9, 0.1)]
    for e in probes:
        assert point_dist(PROD.p(u(e)), PROD.p(e)) < 1e-9
    from dirfib import certify_chain_linkage
    cert = certify_chain_linkage(out_chain, lambda e: f(u(e)),
                                 lambda e: e, probes)
    assert cert.passed


def test_vertical_inverse_builds_a_certified_vertical_chain():
    g = DMap(lambda e: np.array([float(e[0]), float(e[1]) / 2]),
             PROD.total, PROD.total)
    h = DHomotopy(lambda e, t: np.array(
        [float(e[0]), float(e[1]) * (1 + float(t)) / 2]),
        PROD.total, PROD.total)
    c = HomotopyChain((ChainStep(True, h),))
    g_prime, vchain, to_id = vertical_inverse(PROD, g, c)
    probes = [as_point(0.3, 0.8), as_point(0.7, 0.2)]
    for e in probes:
        assert point_dist(PROD.p(g_prime(e)), PROD.p(e)) < 1e-9
        assert point_dist(vchain.chain.start(e), g(g_prime(e))) < 1e-9
        assert point_dist(vchain.chain.end(e), e) < 1e-9
    assert certify_vertical_chain(vchain, probes, GRID,
                                  end=lambda e: e).passed


def test_vertical_inverse_rejects_overlong_chains():
    h = DHomotopy(lambda e, t: e, PROD.total, PROD.total)
    c = HomotopyChain(tuple(ChainStep(True, h) for _ in range(3)))
    g = DMap(lambda e: e, PROD.total, PROD.total)
    with pytest.raises(ValueError):
        vertical_inverse(PROD, g, c, max_steps=2)


def test_fibrewise_upgrade_of_a_squaring_equivalence():
    w2 = make_product_fibration(I1, F1)
    f = DMap(lambda e: np.array([e[0], e[1] ** 2]), PROD.total, w2.total)
    f_inv = DMap(lambda e: np.array([e[0], np.sqrt(max(e[1], 0.0))]),
                 w2.total, PROD.total)
    const1 = HomotopyChain((ChainStep(True, DHomotopy(
        lambda e, t: e, w2.total, w2.total)),))
    const2 = HomotopyChain((ChainStep(True, DHomotopy(
        lambda e, t: e, PROD.total, PROD.total)),))
    pack = dhe_to_fhe(PROD, w2, f, f_inv, const1, const2)
    assert pack.vertical
    rng = rng_for(9)
    src = [rng.uniform(0, 1, 2) for _ in range(3)]
    tgt = [rng.uniform(0, 1, 2) for _ in range(3)]
    grid = SampleGrid(9, (Fraction(1, 2),))
    assert certify_equivalence_pack(pack, src, tgt, grid).passed
    # the replacement inverse stays over the base even where f_inv did not
    # need fixing
    for e in tgt:
        assert point_dist(PROD.p(pack.backward(e)), w2.p(e)) < 1e-9


def test_shrinkable_section_over_the_base():
    s = DMap(lambda b: np.append(b, 0.0), I1, PROD.total)
    h = DHomotopy(lambda e, t: np.array(
        [float(e[0]), float(t) * float(e[1])]), PROD.total, PROD.total)
    c = HomotopyChain((ChainStep(True, h),))
    rng = rng_for(12)
    total_probes = [rng.uniform(0, 1, 2) for _ in range(3)]
    base_probes = [rng.uniform(0, 1, 1) for _ in range(3)]
    grid = SampleGrid(9, (Fraction(1, 2),))
    cert = shrinkable_check(PROD, s, c, total_probes, base_probes, grid)
    assert cert.passed
    bad = DMap(lambda b: np.append(b + 0.1, 0.0), I1, PROD.total)
    cert = shrinkable_check(PROD, bad, c, total_probes, base_probes, grid)
    assert cert.verdict == "FAIL"


def make_cylinder_witness():
    base = derive_space("product", I1, directed_interval(1))
    w0 = make_product_fibration(base, F1)
    return FibrationWitness(w0.p, w0.lifter, w0.provenance,
                            {**w0.metadata, "cylinder_base": I1})


def test_cylinder_retraction_projects_as_promised():
    w = make_cylinder_witness()
    retraction, pack = cylinder_retraction(w)
    rng = rng_for(5)
    for _ in range(4):
        e = rng.uniform(0, 1, 3)
        for t in GRID.params():
            got = w.p(retraction.R(e, t))
            assert point_dist(got, [e[0], float(t)]) < 1e-9
        # the product witness retracts without moving the point
        assert point_dist(retraction.r(e), e) < 1e-9
    src = [np.array([rng.uniform(), 0.0, rng.uniform()]) for _ in range(4)]
    tgt = [np.array([rng.uniform(), 1.0, rng.uniform()]) for _ in range(4)]
    assert certify_equivalence_pack(pack, src, tgt, GRID).passed


def test_cylinder_retraction_needs_the_base_factor():
    with pytest.raises(ValueError):
        cylinder_retraction(PROD)
