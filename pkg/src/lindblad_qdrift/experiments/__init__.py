"""Experiment harness: configs, drivers, output writers and the CLI."""
from .config import (DEFAULT_TOLERANCES, ExperimentConfig, config_from_dict, default_config,
                     load_config, load_tolerances)
from .drivers import (Result, SlopeFit, evaluate, fit_loglog_slope, run, run_davies_verify,
                      run_gap_certificate, run_gibbs_convergence, run_scaling_average,
                      run_scaling_random, run_spectrum, run_step_order)
from .fixtures import qubit_pair_ensemble
