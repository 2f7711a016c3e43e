"""Finite-scale coarse geometry for uniform Roe algebras without bounded geometry."""
from .space import (
    INF, ClusterChain, ExtMetric, GrowthProfile, MetricError, NetData, PointSet, ball,
    coarse_components, diameter, discreteness_gap, greedy_clusters, greedy_net, growth_profile,
    validate_metric,
)
from .metric_order import (
    EPair, MembershipError, MetricCert, check_membership, epair_precedes, join_metric, precedes,
    restriction_metric,
)
from .operators import (
    BlockRep, Decomposition, FiniteGroup, MembershipCert, PropagationError, SparseOp, band_sparsity,
    block_embedding, certify_membership, decompose_banded, op_norm, propagation, support_metric,
)
from .schur import (
    CPTerms, HRFamily, HRParams, SchurKernel, ball_averaging_family, convergence_run, cp_decomposition,
    gram_kernel, hr_check, net_transport, schur_apply, uniform_hr_family,
)
from .coarse import (
    CoarseMapData, MoritaIndex, check_coarse_equivalence, choose_section, expansion_profile,
    image_bg_bound, induced_conjugation, morita_forward, morita_index, morita_inverse,
)

__version__ = "0.1.0"
