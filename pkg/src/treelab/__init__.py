"""Uniform random labelled trees: sampling, tree parameters, exact moments."""

from .automorphisms import (
    BranchShape,
    aut_full_order,
    aut_rooted_order,
    branch_table,
    lambda_branch,
    log_aut_full,
    log_aut_rooted,
    log_aut_small,
)
from .harness import ExperimentConfig, SummaryStats, run_experiment, tail_report
from .patterns import Pattern, path_count, pattern_census, pattern_count
from .sampler import SeedSpec, aldous_broder_stage1, prufer_decode, sample_prufer, sample_uniform
from .tree import LabelledTree, Perturbation, beta, distance, perturb

__version__ = "0.1.0"
