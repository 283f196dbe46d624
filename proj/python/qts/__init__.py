"""Quantum vs classical sequence models on synthetic monthly series.

Thin wrapper over the compiled ``_qts`` extension: statevector simulation,
amplitude encoding, QLSTM/LSTM training, quantum and echo-state reservoirs,
and the corpus/experiment pipeline. Dict-based helpers are provided for the
json-string experiment interface.
"""

from __future__ import annotations

import json as _json

from ._qts import (
    Circuit,
    DataError,
    Gate,
    NumericError,
    StateVector,
    amplitude_encode,
    build_lags,
    compare_files,
    esn_features,
    expect_pauli,
    fit_ridge,
    generate_corpus,
    generate_json,
    parameter_shift_grad,
    predict_linear,
    pseudo_accuracy,
    qrc_features,
    rmse,
    run_and_write_json,
    run_circuit,
    run_experiment_json,
    standardize,
    train_forecaster,
    z_expectations,
)

__all__ = [
    "Circuit",
    "DataError",
    "Gate",
    "NumericError",
    "StateVector",
    "amplitude_encode",
    "build_lags",
    "compare_files",
    "esn_features",
    "expect_pauli",
    "fit_ridge",
    "generate",
    "generate_corpus",
    "generate_json",
    "parameter_shift_grad",
    "predict_linear",
    "pseudo_accuracy",
    "qrc_features",
    "rmse",
    "run_and_write_json",
    "run_circuit",
    "run_experiment",
    "run_experiment_json",
    "standardize",
    "train_forecaster",
    "write_experiment",
    "z_expectations",
]


def run_experiment(config: dict) -> dict:
    """Run one experiment from a config dict and return the result dict."""
    return _json.loads(run_experiment_json(_json.dumps(config)))


def write_experiment(config: dict) -> dict:
    """Run one experiment, write its output files, and return the result."""
    return _json.loads(run_and_write_json(_json.dumps(config)))


def generate(config: dict) -> None:
    """Generate a corpus from a config dict and write its files."""
    generate_json(_json.dumps(config))
