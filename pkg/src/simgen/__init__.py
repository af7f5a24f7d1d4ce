"""simgen: weighted ordered trees and random allocations.

Exact partition tables, conditioned samplers built on the cycle rotation,
local limit trees, and limit-law predictions with empirical verification.
"""

from .weights import (WeightSpec, CanonicalLaw, by_name, canonical_law,
                      classify, nu, phi, psi, shift_support, tau_of, tilt)
from .trees import (OrderedTree, TreeStats, all_trees, depths, fringe_counts,
                    left_ball, subtree_ends, validate_degrees)
from .trees import stats as tree_stats
from .exact import (PartitionTable, alloc_marginal, brute_force, build_table,
                    feasible, joint_degree_prob, root_degree_pmf, z_tree)
from .sampling import (GW_NODE_BUDGET, Allocation, KestenBall, KestenSpec,
                       RngStream, VoseAlias, alloc_to_tree, as_generator,
                       cyclic_shifts, rotate_allocations, sample_alloc_exact,
                       sample_alloc_rejection, sample_allocations,
                       sample_forest, sample_gw, sample_kesten_ball,
                       sample_size_biased_ball, sample_tree, sample_trees)
from .stats import (EmpiricalSummary, Prediction, Report, compare,
                    dist_kolmogorov, dist_kolmogorov_mod, dist_tv,
                    dist_tv_counts, fringe_prob, predict_degree_law,
                    predict_forest_max, predict_max_degree,
                    predict_partition_asympt, summarize_rows)

__version__ = "0.1.0"
