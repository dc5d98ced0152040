"""Multi-round influence maximization under independent cascade."""

__version__ = "0.1.0"

from ._backend import available_backends, kernels
from .adaptive import (AdaGreedyPolicy, AdaIMMPolicy, AdaptiveState, Environment, estimate_policy_value,
                       run_policy)
from .bench import ExperimentConfig, baseline_sg, baseline_sg_r, run_experiment
from .graph import Graph, WeightScheme, generate_synthetic, load_edge_list
from .greedy import GreedyConfig, cr_greedy, wr_greedy
from .imm import ada_imm_round, compute_params, cr_naimm, wr_naimm
from .rrset import RRCollection, gen_multi_round_rr, gen_rr
from .spread import SeedSchedule, SpreadEstimate, spread_exact, spread_mc

BACKEND = kernels.NAME

__all__ = [
    "AdaGreedyPolicy", "AdaIMMPolicy", "AdaptiveState", "BACKEND", "Environment", "ExperimentConfig", "Graph",
    "GreedyConfig", "RRCollection", "SeedSchedule", "SpreadEstimate", "WeightScheme", "ada_imm_round",
    "available_backends", "baseline_sg", "baseline_sg_r", "compute_params", "cr_greedy", "cr_naimm",
    "estimate_policy_value", "gen_multi_round_rr", "gen_rr", "generate_synthetic", "load_edge_list",
    "run_experiment", "run_policy", "spread_exact", "spread_mc", "wr_greedy", "wr_naimm",
]
