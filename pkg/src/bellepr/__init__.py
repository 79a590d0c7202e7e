"""Executable locality, determinism and EPR-style constructions on finite Bell scenarios."""
from .scenario import Behavior, Scenario, chsh_value, find_perfect_correlations, pr_box_behavior
from .hvmodel import HiddenVariableModel, check, reconstruct_behavior
from .decide import Joint, decide_lhv, decide_mdl, mdl_threshold
from .assignments import ValueConstraintSystem, check_value_assignment, ks_colorable
from .constructions import counterfactual_completion, hall_brans_model, pr_box_model

__version__ = "0.1.0"
