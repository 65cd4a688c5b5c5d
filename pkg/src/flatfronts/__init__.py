"""Discrete flat fronts in hyperbolic 3-space.

Construction of surface families from discrete holomorphic maps on quad
grids, numerical verification of their geometry (flat connection,
circularity, unit Gauss curvature in the mixed-area sense, reflection
propagation, Gauss-map cross-ratio laws), and the inverse construction
recovering the holomorphic potential from a Darboux pair.
"""

from .errors import (
    CoincidentPoints,
    DegenerateQuad,
    DegenerateStep,
    DiscreteGeometryError,
    EntryMismatch,
    Inconsistent,
    InputError,
    InvalidParameter,
    NegativeBranch,
    NoIntersection,
    NotClosed,
    NotFlat,
    NotHermitian,
    NotIntegrable,
    NotUnitSpacelike,
    NotUnitTimelike,
    PoleOnVertex,
    RegularityViolation,
    SingularEdge,
    WrongSheet,
)
from .frame import (
    E0,
    E1,
    E2,
    E3,
    EdgeConnection,
    SL2Frame,
    build_connection,
    check_flat,
    integrate_frame,
    minkowski,
    pauli_pack,
    pauli_unpack,
    sl2_act,
)
from .front import (
    CurvatureReport,
    FlatFrontFamily,
    build_front,
    circularity_check,
    curvature_sphere,
    eval_front,
    eval_front_coords,
    gauss_curvature,
    lie_lift,
    lie_product,
    mixed_area,
    propagation_check,
    reflect,
    reflection_vectors,
    rodrigues_check,
)
from .gauss import (
    DarbouxPair,
    a_of,
    darboux_propagate,
    extract_pair,
    gauss_maps,
    lift_affine,
    pair_labelling,
    projective_cross_ratio,
    verify_pair_cross_ratios,
)
from .grid import EdgeForm, EdgeLabelling, QuadGrid, derivative, derived, integrate_edge_form
from .holo import (
    DualData,
    HolomorphicMap,
    christoffel_dual,
    cross_ratio,
    factorize_r,
    koenigs_diagonal_check,
    make_linear,
    make_moebius,
    validate_holomorphic,
)
from .invert import (
    RawConnection,
    WeierstrassData,
    check_compatibility,
    connection_entries,
    invert_pair,
    normalize_lifts,
    recover_potential,
    solve_gauge,
)
from .io import (
    ValidationReport,
    export_obj,
    poincare_project,
    run_validation,
)

__version__ = "0.1.0"
