"""
Synthetic dataset-shift laboratory: data generation, built-in classifiers, shift scenarios and experiments.
"""

from protclass.shift.datasets import Dataset, SyntheticSpec, generate
from protclass.shift.experiment import ExperimentTable, run_scenario_experiment
from protclass.shift.models import (
    GAUSSIAN_NAIVE_BAYES,
    LOGISTIC_REGRESSION,
    MODEL_KINDS,
    SimpleModel,
    fit_simple,
    predict_proba,
)
from protclass.shift.scenarios import (
    CONCEPT_SHIFT,
    SCENARIO_KINDS,
    UNPERTURBED,
    X_IMBALANCE,
    Y_IMBALANCE,
    ShiftScenario,
    apply_scenario,
)

__all__ = [
    "CONCEPT_SHIFT",
    "Dataset",
    "ExperimentTable",
    "GAUSSIAN_NAIVE_BAYES",
    "LOGISTIC_REGRESSION",
    "MODEL_KINDS",
    "SCENARIO_KINDS",
    "ShiftScenario",
    "SimpleModel",
    "SyntheticSpec",
    "UNPERTURBED",
    "X_IMBALANCE",
    "Y_IMBALANCE",
    "apply_scenario",
    "fit_simple",
    "generate",
    "predict_proba",
    "run_scenario_experiment",
]
