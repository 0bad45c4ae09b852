"""Ollivier-Ricci curvature via exact optimal transport, plus a
desk-scale simulator of the block-encoding estimation pipelines."""

__version__ = "0.1.0"

from . import errors
from .blockenc import (
    BlockEncoding,
    PermutationSpec,
    StateVector,
    be_density,
    be_dilate,
    be_identity,
    be_invert,
    be_lcu,
    be_power,
    be_product,
    be_scale,
    be_tensor,
    be_wrap,
    dilated_apply,
    overlap,
)
from .graph import (
    Graph,
    GeodesicMatrix,
    LocalNeighborhood,
    all_pairs_geodesic,
    load_graph,
    neighborhood,
    verify_tree,
)
from .qpipeline import (
    AuditTrail,
    DistanceEncodingMeta,
    EigenEstimate,
    QsimConfig,
    build_distance_encoding,
    build_DP,
    build_Pi,
    extract_Di,
    localize_DG,
    min_eigen_power,
    perm_index,
    pq_qsim_from_cost,
    tree_overlap_sum,
    w1_pq_qsim,
    w1_tree_qsim,
)
from .transport import (
    AssignmentSolution,
    CurvatureResult,
    TransportPlan,
    curvature,
    lp_vertex_oracle,
    w1_assignment,
    w1_bruteforce,
    w1_lp,
    w1_tree,
)

__all__ = [name for name in dir() if not name.startswith("_")]
