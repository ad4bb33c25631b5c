"""Compile DNF strategy descriptions into procedural instructions.

The pipeline: planning environments produce demonstration trajectories, the
compiler turns a DNF description plus those demonstrations into a pruned
procedural formula, the translator renders it as step-by-step text, and the
metrics score how closely other trajectories follow it.
"""

from .compiler import LikelihoodModel, loglikelihood, prune, transform
from .envs import (
    BeliefState,
    EnvSpec,
    MetaAction,
    TERMINATE,
    builtin_names,
    builtin_spec,
    expected_score,
    initial_belief,
    sample_ground_truth,
    step,
)
from .formulas import (
    Condition,
    Conjunction,
    DnfFormula,
    Literal,
    LoopBack,
    PredicateRef,
    ProceduralFormula,
    ProceduralStep,
    parse_dnf,
    parse_ltl,
    print_dnf,
    print_ltl,
)
from .metrics import click_agreement, deviation_profile, fsq, task_performance
from .pipeline import PipelineConfig, builtin_config, load_config, run_pipeline
from .policies import FormulaController, consistency, named_policy, rollout, rollouts
from .predicates import ARITIES, truth_matrix
from .trajectories import (
    Trajectory,
    read_trajectories,
    trajectory_from_actions,
    validate_trajectory,
    write_trajectories,
)
from .translate import Dictionary, builtin_dictionary, load_dictionary, translate

__version__ = "0.1.0"

__all__ = [
    "ARITIES",
    "BeliefState",
    "Condition",
    "Conjunction",
    "Dictionary",
    "DnfFormula",
    "EnvSpec",
    "FormulaController",
    "LikelihoodModel",
    "Literal",
    "LoopBack",
    "MetaAction",
    "PipelineConfig",
    "PredicateRef",
    "ProceduralFormula",
    "ProceduralStep",
    "TERMINATE",
    "Trajectory",
    "builtin_config",
    "builtin_dictionary",
    "builtin_names",
    "builtin_spec",
    "click_agreement",
    "consistency",
    "deviation_profile",
    "expected_score",
    "fsq",
    "initial_belief",
    "load_config",
    "load_dictionary",
    "loglikelihood",
    "named_policy",
    "parse_dnf",
    "parse_ltl",
    "print_dnf",
    "print_ltl",
    "prune",
    "read_trajectories",
    "rollout",
    "rollouts",
    "run_pipeline",
    "sample_ground_truth",
    "step",
    "task_performance",
    "trajectory_from_actions",
    "transform",
    "translate",
    "truth_matrix",
    "validate_trajectory",
    "write_trajectories",
]
