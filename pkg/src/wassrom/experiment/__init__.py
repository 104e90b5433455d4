from .config import ExperimentConfig, SweepSpec, load_config, parse_config
from .runner import (
    check_thresholds,
    evaluate,
    fit,
    generate,
    run_experiment,
    run_size_sweep,
    runtime_report,
)
