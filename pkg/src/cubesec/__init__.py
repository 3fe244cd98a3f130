"""Maximal-volume central sections of the hypercube via tight frames."""

from .frame_core import (
    EPS_TIGHT,
    Frame,
    FrameError,
    NotAFrameError,
    Subspace,
    TightFrame,
    TightnessError,
    cross_product_frame,
    det_rank_one,
    frame_edit,
    frame_from_subspace,
    frame_operator,
    random_tight_frame,
    sqrt_det_first_order,
    subspace_from_frame,
    whiten,
)
from .polytope import (
    DegenerateFacetError,
    FacetRecord,
    SectionPolytope,
    build_section,
    facet_centroid,
    pyramid_volume,
    rotate_facet_predict,
    rotated_section_volume,
    section_volume_fast,
    shift_facet_predict,
    shifted_section_volume,
    volume,
    volume_by_triangulation,
)
from .conditions import (
    ConditionsReport,
    check_centroid,
    check_cyclic,
    check_facet_balance,
    check_facet_correspondence,
    check_length_bounds,
    verify_frame,
)
from .bounds import (
    BoundsReport,
    PlanarAngles,
    ball_ratio,
    ball_upper,
    c_cube,
    c_cube_squared,
    claim_bounds,
    extremal_frame,
    extremal_squared_volume_exact,
    g,
    h,
    isoperimetric_check,
    planar_angles,
    planar_area,
    q,
    vaaler_lower,
)
from .optimizer import (
    OptimizeResult,
    OptimizerConfig,
    ascend,
    criterion_gap,
    maximize,
)

__version__ = "0.1.0"
