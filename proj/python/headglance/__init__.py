"""Head-pose glance classification: synthetic data, classifiers and evaluation."""

from ._core import (
    GLANCE_REGIONS,
    TASKS,
    DataError,
    Dataset,
    Error,
    NumericalError,
    PreconditionError,
    default_scenario_json,
    estimate_pose,
    fit_pca,
    generate_dataset,
    generate_from_scenario,
    load_dataset,
    metrics,
    profile_subjects,
    project_face,
    run_experiment,
    validate_experiment_config,
)

__all__ = [
    "GLANCE_REGIONS",
    "TASKS",
    "DataError",
    "Dataset",
    "Error",
    "NumericalError",
    "PreconditionError",
    "default_scenario_json",
    "estimate_pose",
    "fit_pca",
    "generate_dataset",
    "generate_from_scenario",
    "load_dataset",
    "metrics",
    "profile_subjects",
    "project_face",
    "run_experiment",
    "validate_experiment_config",
]
