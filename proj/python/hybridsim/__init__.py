"""Hybrid SSA/ODE simulation of chemical reaction networks."""

from ._core import (
    EnsembleError,
    EnsembleReport,
    IntegrationError,
    ModelError,
    Network,
    RngStream,
    __version__,
    build_model,
    builtin_models,
    ensemble_csv,
    load_model_file,
    parse_model,
    philox4x32_10,
    run_convergence,
    run_ensemble,
    simulate,
    ssa_simulate,
)

__all__ = [
    "EnsembleError",
    "EnsembleReport",
    "IntegrationError",
    "ModelError",
    "Network",
    "RngStream",
    "__version__",
    "build_model",
    "builtin_models",
    "ensemble_csv",
    "load_model_file",
    "parse_model",
    "philox4x32_10",
    "run_convergence",
    "run_ensemble",
    "simulate",
    "ssa_simulate",
]
