"""Optimal troubleshooting sequences for models with a tree of cost clusters."""

from .document import EXAMPLE_1, build_model, dump_model, load_model, to_document
from .ecr import EvidenceState, PlanResult, SequenceError, conditional_cost, evaluate_ecr, evaluate_plan
from .flat import DispatchError, MaximizingSet, maximizing_set, p_over_c, plan_basic, plan_flat
from .kernels import BACKEND
from .model import Action, ClusterNode, FaultSpec, IndependenceError, ModelError, TroubleshootingModel, make_model
from .oracle import OracleReport, brute_force_optimal
from .sim import SimulationSummary, estimate_ecr, simulate_once
from .tree import CompoundAction, induce_absorption, plan_tree

__version__ = "0.1.0"
