"""Common subtrees of random leaf-labeled binary trees.

Exact combinatorics (counting, enumeration, maximum agreement subtrees),
a randomized recursive construction of large common subtrees, the
stochastic models that predict its growth exponent, and a Monte Carlo
experiment harness with a CLI front end.
"""

from .labels import (
    BRANCHPOINT,
    ORIGINAL,
    TERMINAL,
    Label,
    branchpoint,
    original,
    original_range,
    parse_label,
    terminal,
)
from .trees import (
    ENUMERATION_LIMIT,
    SizeGuardError,
    Tree,
    branch_leaf_counts,
    branchpoint_of_three,
    canonical_form,
    centroid,
    count_trees,
    count_trees_asymptotic,
    enumerate_trees,
    induced_subtree,
    parse_newick,
    random_tree,
    relabel,
    split_at_branchpoint,
    to_newick,
    trees_equal,
)
from .mast import MastResult, RootedTree, brute_force_mast, mast, root_at_leaf, rooted_mast
from .stochastic import (
    BETA_RANDOM,
    ChainState,
    Simplex3,
    SplitVector,
    beta_random_residual,
    branch_size_pmf,
    centroid_rank_moments,
    centroid_residual,
    chain_step,
    dirichlet_moment,
    estimate_q,
    fragmentation_step,
    hypergeometric_mean,
    hypergeometric_pmf,
    hypergeometric_variance,
    martingale_check,
    run_size_chain,
    sample_branch_sizes,
    sample_dirichlet_half,
    sample_hypergeometric,
    solve_beta_centroid,
    solve_beta_random,
)
from .construction import (
    ConstructionItem,
    ConstructionOutput,
    TraceRecord,
    run_construction,
    split_item,
    stage0,
    track_leaf_sizes,
)
from .experiments import (
    ChainComparisonReport,
    ExperimentConfig,
    ScalingResult,
    SizeSummary,
    run_chain_vs_construction,
    run_martingale_experiment,
    run_scaling_construct,
    run_scaling_mast,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # labels
    "Label",
    "ORIGINAL",
    "TERMINAL",
    "BRANCHPOINT",
    "original",
    "terminal",
    "branchpoint",
    "original_range",
    "parse_label",
    # trees
    "Tree",
    "SizeGuardError",
    "ENUMERATION_LIMIT",
    "count_trees",
    "count_trees_asymptotic",
    "random_tree",
    "enumerate_trees",
    "induced_subtree",
    "relabel",
    "canonical_form",
    "trees_equal",
    "branchpoint_of_three",
    "split_at_branchpoint",
    "branch_leaf_counts",
    "centroid",
    "parse_newick",
    "to_newick",
    # mast
    "MastResult",
    "RootedTree",
    "root_at_leaf",
    "rooted_mast",
    "mast",
    "brute_force_mast",
    # stochastic
    "BETA_RANDOM",
    "Simplex3",
    "SplitVector",
    "ChainState",
    "branch_size_pmf",
    "sample_branch_sizes",
    "sample_dirichlet_half",
    "dirichlet_moment",
    "solve_beta_random",
    "beta_random_residual",
    "fragmentation_step",
    "martingale_check",
    "hypergeometric_pmf",
    "hypergeometric_mean",
    "hypergeometric_variance",
    "sample_hypergeometric",
    "chain_step",
    "run_size_chain",
    "estimate_q",
    "centroid_rank_moments",
    "centroid_residual",
    "solve_beta_centroid",
    # construction
    "ConstructionItem",
    "ConstructionOutput",
    "TraceRecord",
    "stage0",
    "split_item",
    "run_construction",
    "track_leaf_sizes",
    # experiments
    "ExperimentConfig",
    "SizeSummary",
    "ScalingResult",
    "ChainComparisonReport",
    "run_scaling_construct",
    "run_scaling_mast",
    "run_chain_vs_construction",
    "run_martingale_experiment",
]
