from .config import ExperimentConfig, load_config, parse_config
from .experiments import (
    bandwidth_report,
    bandwidth_search,
    derive_seed,
    interactions_report,
    run_experiment,
    spectra_report,
    verify_command,
)
