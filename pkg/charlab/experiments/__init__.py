"""Experiments run by the command line, one class per subcommand."""

from typing import Dict, Type

from ..config.models import Subcommand
from .base_experiment import Experiment
from .charsum_experiments import Axiom4Experiment, DensityExperiment, SumExperiment, WeilScanExperiment
from .equidist_experiments import DiscrepancyExperiment, EtkSearchExperiment, WitnessExperiment
from .measure_experiments import DecomposeExperiment, FubiniExperiment, IntegrateExperiment, MeasureFitExperiment
from .reports import Report, assert_expectations, check_expectations
from .theta_experiments import ThetaExperiment

EXPERIMENTS: Dict[Subcommand, Type[Experiment]] = {
    cls.subcommand: cls
    for cls in (
        SumExperiment,
        WeilScanExperiment,
        Axiom4Experiment,
        DensityExperiment,
        ThetaExperiment,
        MeasureFitExperiment,
        IntegrateExperiment,
        FubiniExperiment,
        DecomposeExperiment,
        DiscrepancyExperiment,
        EtkSearchExperiment,
        WitnessExperiment,
    )
}

__all__ = [
    "EXPERIMENTS",
    "Experiment",
    "Report",
    "assert_expectations",
    "check_expectations",
]
