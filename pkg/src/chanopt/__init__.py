"""Observation channels for finite-grid stochastic control: convergence modes,
optimal-cost continuity, quantizers, multi-stage models and estimation."""

from .channels import (
    Channel,
    ChannelSequence,
    JointMeasure,
    conditional_x_given_y,
    convergence_report,
    join,
    mixture,
    uniform_tv,
)
from .control import CostSpec, best_worst_channel, continuity_bound_check, optimal_cost, optimal_policy
from .measures import DiscreteMeasure, Grid, GridMismatchError, TestSetFamily, bl_distance, setwise_gap, tv_distance
from .multistage import MultistageModel, NumericGuardError, solve_exhaustive
from .quantizers import Quantizer, RandomQuantizer, decompose_random_quantizer, optimize_interval_quantizer
from .scenarios import list_scenarios, run_scenario

__all__ = [
    "Channel",
    "ChannelSequence",
    "CostSpec",
    "DiscreteMeasure",
    "Grid",
    "GridMismatchError",
    "JointMeasure",
    "MultistageModel",
    "NumericGuardError",
    "Quantizer",
    "RandomQuantizer",
    "TestSetFamily",
    "best_worst_channel",
    "bl_distance",
    "conditional_x_given_y",
    "continuity_bound_check",
    "convergence_report",
    "decompose_random_quantizer",
    "join",
    "list_scenarios",
    "mixture",
    "optimal_cost",
    "optimal_policy",
    "optimize_interval_quantizer",
    "run_scenario",
    "setwise_gap",
    "solve_exhaustive",
    "tv_distance",
    "uniform_tv",
]
