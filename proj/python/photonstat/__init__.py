# Copyright 2026 The photonstat Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Single-photon source simulation and HBT correlation analysis."""

import json as _json

from . import _core
from ._core import (
    ConfigError,
    DomainError,
    GeometryError,
    InsufficientDataError,
    IoError,
    NoConvergenceError,
    ParseError,
    PhotonstatError,
    RegimeError,
    ValidationError,
    efficiency,
    g2_theory,
    lag_values,
    read_archive,
    reflection,
    report,
    sample_heterodyne,
    transition_frequency,
)

__version__ = _core.__version__


def _config_text(config):
    if config is None:
        return ""
    if isinstance(config, str):
        return config
    return _json.dumps(config)


def resolve_config(config=None):
    """Validated config dict with every default filled in."""
    return _json.loads(_core.resolve_config(_config_text(config)))


def config_hash(config=None):
    return _core.config_hash(_config_text(config))


def fit_reflection(detuning, r):
    return _json.loads(_core.fit_reflection(detuning, r))


def fit_flux_spectrum(phi, frequency_ghz):
    return _json.loads(_core.fit_flux_spectrum(phi, frequency_ghz))


def fit_rabi(theta, values, model="quadrature"):
    return _json.loads(_core.fit_rabi(theta, values, model))


def _load_summary(out_dir):
    with open(f"{out_dir}/summary.json") as f:
        return _json.load(f)


def run_spectro(config=None):
    """Runs the spectroscopy experiment and returns its summary dict."""
    return _load_summary(_core.run_spectro(_config_text(config)))


def run_hbt(config=None):
    """Runs the HBT experiment and returns its summary dict."""
    return _load_summary(_core.run_hbt(_config_text(config)))


def run_rabi(config=None):
    """Runs the Rabi sweep and returns its summary dict."""
    return _load_summary(_core.run_rabi(_config_text(config)))


def bench(config=None, workers=(1,), repeats=1):
    return _json.loads(_core.bench(_config_text(config), list(workers), repeats))
