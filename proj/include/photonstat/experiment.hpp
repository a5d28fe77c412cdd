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


#ifndef PHOTONSTAT_EXPERIMENT_HPP
#define PHOTONSTAT_EXPERIMENT_HPP

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "photonstat/config.hpp"
#include "photonstat/correlator.hpp"
#include "photonstat/fitting.hpp"
#include "photonstat/manifest.hpp"
#include "photonstat/qubit_model.hpp"

namespace photonstat {

struct DipEntry {
    double flux = 0.0;
    double transition_ghz = 0.0;  // model, NaN when masked
    double dip_ghz = 0.0;         // probe grid point of minimum |r|
    double dip_magnitude = 0.0;
};

struct SpectroOutput {
    SpectrumMap map;
    std::vector<DipEntry> dips;
    double sweet_spot_dip_ghz = 0.0;  // dip of the flux point closest to zero
    double working_flux = 0.0;        // flux placing the qubit at the working frequency
    FitReport flux_fit;
    FitReport power_fit;
    RunManifest manifest;
};

/// Flux map, dip table and a reflection power sweep at the working point. Writes
/// flux_map.csv, dips.csv, reflection_sweep.csv, spectro_fit.json, summary.json and
/// manifest.json into config.output.dir.
SpectroOutput run_spectro(const ExperimentConfig &config);

struct HbtOutput {
    CorrelationResult correlation;
    PeakTable peaks;
    RabiTrace rabi;
    CorrelationTheory theory;
    RunManifest manifest;
};

/// Runs config.shots shots of config.state, writing correlation.json, peaks.csv,
/// rabi_trace.csv, summary.json, manifest.json and, with store_traces, traces.phst.
HbtOutput run_hbt(const ExperimentConfig &config);

struct RabiSweepRow {
    double theta_r = 0.0;
    double quad_peak = 0.0;  // quadrature at the pulse start sample
    double quad_peak_stderr = 0.0;
    double power_peak = 0.0;  // cross power at the pulse start sample
    double power_peak_stderr = 0.0;
    double g1_center = 0.0;
    double g1_center_stderr = 0.0;
    double g1_side = 0.0;
    double g1_side_stderr = 0.0;
    double g2_ratio = 0.0;
    double g2_ratio_stderr = 0.0;
};

struct RabiSweepOutput {
    std::vector<RabiSweepRow> rows;
    FitReport quad_fit;
    FitReport power_fit;
    RunManifest manifest;
};

/// Sweeps state.theta_sweep with config.shots shots per angle; point i uses seed
/// derive_seed(seed, i). Writes rabi.csv, rabi_fit.json, summary.json and manifest.json.
RabiSweepOutput run_rabi(const ExperimentConfig &config);

struct BenchRun {
    int workers = 1;
    std::vector<double> shots_per_second;  // one per repeat
    double median = 0.0;
    double spread = 0.0;  // (max - min) / median
};

struct BenchReport {
    uint64_t shots = 0;
    std::vector<BenchRun> runs;
    double scaling = 0.0;  // median(last) / median(first)
    nlohmann::json to_json() const;
};

/// Times end-to-end synthesis, demodulation and accumulation of config.shots shots for
/// each worker count. Throws ValidationError for zero shots or an empty worker list.
BenchReport bench_throughput(const ExperimentConfig &config, const std::vector<int> &worker_counts,
                             int repeats = 3);

enum class FitKind { Reflection, Flux, RabiQuadrature, RabiPower };

/// Columns by header name. Throws IoError when unreadable and ParseError on malformed rows.
std::map<std::string, std::vector<double>> read_csv(const std::string &path);

/// Fits a CSV: reflection needs detuning_mhz, re, im; flux needs phi_ratio,
/// frequency_ghz; rabi needs theta_r and quad_peak or power_peak.
FitReport fit_csv(const std::string &path, FitKind kind);

nlohmann::json fit_report_json(const FitReport &report);

/// Human-readable summary of an output directory. Verifies result digests against the
/// manifest; throws IoError when the manifest is missing.
std::string report_directory(const std::string &dir);

/// Parameters echoed into every manifest: the full config plus derived quantities.
nlohmann::json parameter_echo(const ExperimentConfig &config);

/// Fixed-format number for CSV output.
std::string format_number(double value);

}  // namespace photonstat

#endif
