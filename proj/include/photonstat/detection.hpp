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

#ifndef PHOTONSTAT_DETECTION_HPP
#define PHOTONSTAT_DETECTION_HPP

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "photonstat/emission.hpp"

namespace photonstat {

/// Amplifier chain and digitizer of one HBT arm pair. n_add is the excess noise of the
/// chain referred to its input, in photons per mode; the heterodyne vacuum unit is
/// already part of the mode outcomes.
struct ChainParams {
    double n_add_a = 1.0;
    double n_add_b = 1.0;
    double gain_db = 75.0;  // power gain; scales every trace, divided out of reported results
    double if_freq = 50e6;  // Hz
    double sample_rate = 200e6;
    int trace_len = 320;    // samples per control period
    bool if_enabled = true;

    static ChainParams twpa_preset();  // n_add = 1
    static ChainParams hemt_preset();  // n_add = 15

    double gain() const;
    double dt() const {
        return 1.0 / sample_rate;
    }
    /// Throws ValidationError on a violated invariant, including the geometry against `train`.
    void validate(const PulseTrainSpec &train) const;
};

enum class Channel : uint8_t { A = 0, B = 1 };
enum class TraceKind : uint8_t { Signal = 0, NoiseRef = 1 };

struct IQTrace {
    std::vector<std::complex<double>> samples;
    double dt = 0.0;
    Channel channel = Channel::A;
    TraceKind kind = TraceKind::Signal;

    size_t size() const {
        return samples.size();
    }
};

struct ShotRecord {
    IQTrace sig_a;
    IQTrace sig_b;
    IQTrace noise_a;
    IQTrace noise_b;
    uint64_t shot_index = 0;

    /// Throws GeometryError unless the four traces share dt and length.
    void check_consistent() const;
};

/// Sample offset of pulse slot `pulse_index` for the given mode and train.
size_t pulse_start_sample(const TemporalMode &mode, double pulse_period, int pulse_index);

/// Synthesizes one trigger period:
///     sig_x(t_k) = sqrt(G) sum_p outcome_{p,x} f(t_k - p t_p) exp(i 2 pi f_IF t_k) + w_x(t_k)
/// with complex white noise w_x of per-sample variance G n_add_x / dt, so that projecting
/// onto the normalized mode leaves CN(0, G n_add_x). Noise references hold an independent
/// w_x realization only. Throws ConfigError on inconsistent geometry.
ShotRecord synthesize_shot(std::span<const ModeOutcome> outcomes, const TemporalMode &mode,
                           const PulseTrainSpec &spec, const ChainParams &chain, uint64_t seed,
                           uint64_t shot_index);

/// Projection of a trace onto pulse `pulse_index`:
///     sum_k conj(f(t_k - p t_p)) exp(-i 2 pi f_IF t_k) trace(t_k) dt / ||f||^2.
/// Throws WindowError when the pulse window leaves the trace.
std::complex<double> matched_filter(const IQTrace &trace, const TemporalMode &mode, double pulse_period,
                                    int pulse_index, double if_freq);

/// Multiplies sample k by exp(-i 2 pi f_IF t_k). Throws ConfigError unless |f_IF| is
/// below Nyquist.
IQTrace digital_downconvert(const IQTrace &trace, double if_freq);

/// Sliding matched filter at baseband: y(k) = sum_j conj(f_j) x(k + j) dt. The value at a
/// pulse's start sample equals that pulse's matched_filter output; elsewhere y traces the
/// mode autocorrelation.
IQTrace mode_filter(const IQTrace &trace, const TemporalMode &mode);

/// Downconverts (when the chain uses an IF) and mode-filters all four traces. This is
/// the form in which shots enter the correlator and the Rabi averages.
ShotRecord demodulate_shot(const ShotRecord &shot, const TemporalMode &mode, const ChainParams &chain);

}  // namespace photonstat

#endif
