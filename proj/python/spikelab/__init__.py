# Copyright (C) 2026 The spikelab authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Inference on eigenvectors of spiked sample covariance matrices."""

import json

from . import _spikelab
from ._spikelab import (
    ConfigError,
    NumericalError,
    SubcriticalError,
    aux_funcs,
    gamma_shrink,
    spectral_edges,
    stieltjes_m1,
    stieltjes_m2,
    theta,
    vartheta,
)


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def run_null(config, threads=1):
    """Type-I experiment for a scenario config (dict or JSON text)."""
    return _spikelab.run_null(_text(config), threads)


def run_power(config, phis, threads=1):
    return _spikelab.run_power(_text(config), list(phis), threads)


def run_ecdf(config, threads=1):
    return _spikelab.run_ecdf(_text(config), threads)


def test_data(Y, hypothesis):
    """Run the test on an M x N data matrix; returns the report as a dict."""
    return json.loads(_spikelab.test_data(Y, _text(hypothesis)))


def normalize_config(config):
    """Parse and validate a config, returning it with defaults filled in."""
    return json.loads(_spikelab.normalize_config(_text(config)))


__all__ = [
    "ConfigError",
    "NumericalError",
    "SubcriticalError",
    "aux_funcs",
    "gamma_shrink",
    "normalize_config",
    "run_ecdf",
    "run_null",
    "run_power",
    "spectral_edges",
    "stieltjes_m1",
    "stieltjes_m2",
    "test_data",
    "theta",
    "vartheta",
]
