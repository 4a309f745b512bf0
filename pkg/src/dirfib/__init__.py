"""Directed spaces, directed weak fibrations, and sampled certification."""

from .dspace import (
    DEFAULT_GRID, FAIL, INFEASIBLE, PASS, TOL_DEFAULT, TOL_LINEAR,
    Carrier, Certificate, DMap, DPath, DSpace, SampleGrid, as_point,
    build_path, certify_directed_path, certify_dmap, concatenate,
    constant_path, derive_space, directed_interval, directed_line, face_map,
    frac, make_standard_space, natural_interval, opposite_path,
    reparametrize, wedge_total_space,
)
from .homotopy import (
    ChainStep, DHomotopy, HomotopyChain, MonotoneWarp, VerticalChain,
    as_cylinder_map, certify_chain_linkage, certify_vertical_chain, chain,
    chain_eval, chain_to_interval_homotopy, homotopy_faces,
    is_semistationary, lift_over_segment, point_dist, shape_path, smooth,
    theta_warp,
)
from .fibration import (
    FibrationWitness, LiftProblem, LiftSolution, LiftingPair, PointedPath,
    certify_lift_problem, certify_pointed_path, check_lifting_pair,
    derived_lift, dominated_lift, epsilon_pair, lift_semistationary,
    make_product_fibration, make_wedge_fibration, max_structure_fibration,
    opposite_fibration, pullback_fibration, reversed_lift,
    semistationary_pair_from_lifter, transport_lift, weak_lift,
    wedge_strict_infeasibility,
)
from .transport import (
    CylinderRetraction, EquivalencePack, FiberSpace, bs_spaces_equivalence,
    certify_equivalence_pack, cylinder_retraction, dhe_to_fhe, fiber_space,
    fiber_transport, improve_inverse, pointed_path_dist, shrinkable_check,
    vertical_inverse,
)

__version__ = "0.1.0"
