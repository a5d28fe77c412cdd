// Copyright 2026 The photonstat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef PHOTONSTAT_CONFIG_HPP
#define PHOTONSTAT_CONFIG_HPP

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "photonstat/correlator.hpp"
#include "photonstat/detection.hpp"
#include "photonstat/emission.hpp"
#include "photonstat/pipeline.hpp"
#include "photonstat/qubit_model.hpp"

namespace photonstat {

/// Evenly spaced grid, endpoints included.
struct Range {
    double start = 0.0;
    double stop = 0.0;
    int points = 1;

    std::vector<double> values() const;
};

struct StateConfig {
    StateKind kind = StateKind::QubitSuperposition;
    double theta_r = 3.141592653589793;
    double fidelity = 1.0;
    std::complex<double> alpha{1.0, 0.0};
    Range theta_sweep{0.0, 2 * 3.141592653589793, 17};  // used by rabi

    PreparedState prepared(double theta_r) const;
    PreparedState prepared() const {
        return prepared(theta_r);
    }
};

struct SpectroConfig {
    Range flux{-0.5, 0.5, 201};
    Range probe_ghz{6.0, 11.5, 276};
    double working_freq_ghz = 8.886;
    Range power_dbm{-154.0, -122.0, 9};
    Range detuning_mhz{-15.0, 15.0, 121};
    double rabi_per_sqrt_mw = 2.078e7;  // puts Omega^2 = gamma1 gamma2 at -138 dBm
};

struct CorrelatorSettings {
    int window = 3;
    int gate_halfwidth = 0;
    BackgroundMode background = BackgroundMode::Full;
};

struct OutputConfig {
    std::string dir = "photonstat_out";
    bool store_traces = false;
};

/// Fully resolved experiment description. Every field has a documented default (the
/// device preset); to_json echoes all of them.
struct ExperimentConfig {
    QubitParams qubit = QubitParams::paper_preset();
    ChainParams chain = ChainParams::twpa_preset();
    PulseTrainSpec train;
    StateConfig state;
    SpectroConfig spectro;
    CorrelatorSettings correlator;
    uint64_t shots = 64000;
    int batches = 64;
    uint64_t seed = 1;
    int workers = 1;
    OutputConfig output;
    std::vector<std::string> warnings;  // soft validation findings

    /// Throws ValidationError naming the violated invariant.
    void validate();

    nlohmann::json to_json() const;
    /// SHA-256 of the canonical JSON of every result-affecting parameter.
    std::string hash() const;

    HbtSetup hbt_setup() const;
};

/// Device defaults with trace_len derived from the control period.
ExperimentConfig default_config();

/// Parses and validates a JSON config; omitted fields keep their defaults and a missing
/// chain.trace_len is derived as control_period * sample_rate. Throws ParseError (with
/// line and field) on malformed JSON, unknown fields or wrong types, and ValidationError
/// on violated invariants.
ExperimentConfig parse_config(const std::string &text);

/// Reads `path` and parses it. Throws IoError when the file cannot be read.
ExperimentConfig load_config(const std::string &path);

const char *state_kind_name(StateKind kind);
const char *background_mode_name(BackgroundMode mode);

}  // namespace photonstat

#endif
