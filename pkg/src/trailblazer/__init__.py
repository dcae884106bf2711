"""Sampling-based planning in discounted MDPs with a generative model."""
from .mdp import (
    ContinuousState, ContinuousToy, ContractError, GapProfile, GenerativeModel, MdpFormatError,
    RewardDist, Root, TabularMdp, ValueBounds, bernoulli, bounded_gap, constant, exact_value,
    load_mdp, make_continuous_toy, make_random_mdp, mdp_from_json, optimal_values, power_law,
    sample_transition, save_mdp, tabular,
)
from .planner import (
    BudgetExceeded, DepthGuardError, PlannerConfig, PlanResult, RunCounter, chain_depth,
    confidence_radius, depth_bound, eta, max_depth, plan, sample_budget,
)

__version__ = "0.1.0"
