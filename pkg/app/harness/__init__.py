from .lemmas import REGISTRY, LemmaReport, available_lemmas, lemma_check
from .runner import RUNNERS, ExperimentResult, run_experiment
from .threshold import (
    CrossingEstimate,
    Probe,
    ThresholdEstimate,
    crossing_probability,
    estimate_nc,
    finite_size_report,
)

__all__ = [
    "REGISTRY",
    "LemmaReport",
    "available_lemmas",
    "lemma_check",
    "RUNNERS",
    "ExperimentResult",
    "run_experiment",
    "CrossingEstimate",
    "Probe",
    "ThresholdEstimate",
    "crossing_probability",
    "estimate_nc",
    "finite_size_report",
]
