"""Spreading Bell nonlocality through measurement-based quantum networks.

A library plus CLI for the joint/local-measurement protocol on networks of
noisy singlet pairs: exact X-form state propagation, three Bell detectors
(two-setting bipartite, two-setting multipartite, continuous-settings),
critical-noise thresholds for star and lattice geometries, square-lattice
routing, angle optimization checks, and a dense-matrix oracle that
recomputes everything from first principles.
"""

from .bell import (
    ChshReport,
    FbReport,
    MbkReport,
    chsh_report,
    fb_report,
    lnl,
    mbk_angle,
    mbk_canonical_settings,
    mbk_operator,
    mbk_recursive_operator,
    mbk_value,
    optimal_settings,
)
from .lattice import (
    RoutePlan,
    RoutingError,
    SquareAddress,
    chain_plan,
    nearest_node,
    realize_plan,
    route_square,
    triangular_plan,
)
from .measurement import (
    LocalSetting,
    OutcomeBranch,
    branch_fractions,
    chain_collapse,
    chain_state,
    discard,
    ghz_collapse,
    ghz_fuse,
    ghz_ket,
    local_measure,
    measure_all,
    star_state,
)
from .optimizer import AngleAssignment, branch_sin_sum, optimize, verify_unit_sum_identity
from .oracle import (
    CapacityError,
    OracleConfig,
    oracle_lnl,
    partial_trace,
    project,
    run_validation,
    tensor,
)
from .thresholds import (
    ChainSpec,
    SearchExhaustedError,
    ThresholdResult,
    min_coordination_superadditive,
    min_nodes_superadditive,
    pcr_chain_chsh,
    pcr_chain_fb,
    pcr_chain_mbk,
    pcr_star_chsh,
    pcr_star_fb,
    pcr_star_mbk,
    pcr_star_mbk_noncollab,
)
from .xstate import (
    DenseState,
    WernerParam,
    XState,
    ghz_xstate,
    werner_corner,
    werner_corner_dense,
    werner_dense,
    xstate_from_dense,
    xstate_to_dense,
)

__version__ = "0.1.0"
