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

#ifndef PHOTONSTAT_EMISSION_HPP
#define PHOTONSTAT_EMISSION_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include "photonstat/qubit_model.hpp"
#include "photonstat/rng.hpp"

namespace photonstat {

enum class StateKind { QubitSuperposition, Coherent, Vacuum };

/// State of the emitter (or of the injected reference field) at the start of a pulse
/// slot. For a qubit the density matrix is
///     rho = F |psi(theta)><psi(theta)| + (1 - F) |0><0|,
///     |psi(theta)> = cos(theta/2)|0> + sin(theta/2)|1>,
/// and the emitted mode inherits rho.
struct PreparedState {
    StateKind kind = StateKind::Vacuum;
    double theta_r = 0.0;
    double fidelity = 1.0;
    std::complex<double> alpha{};  // coherent amplitude, Coherent only

    /// p1 for a qubit, |alpha|^2 for a coherent state.
    double mean_photons() const;
    /// <a> of the emitted mode; F*sin(theta)/2 for a qubit.
    std::complex<double> mean_field() const;
    /// <a^dag a^dag a a>; zero for anything built from |0> and |1>.
    double second_factorial_moment() const;
};

/// Throws DomainError for fidelity outside [0, 1] or a non-finite angle.
PreparedState prepare_state(double theta_r, double fidelity);
PreparedState coherent_state(std::complex<double> alpha);
PreparedState vacuum_state();

/// Normalized wavepacket of the emitted photon, sampled at t_k = origin + k*dt.
/// Normalization is discrete: sum |f(t_k)|^2 dt = 1.
struct TemporalMode {
    std::vector<std::complex<double>> samples;
    double dt = 0.0;      // s
    double origin = 0.0;  // s, offset of sample 0 within its pulse slot
    /// f[k+1]/f[k] when the envelope is a pure exponential, else 0. Lets the mode filter
    /// run as a one-pole recursion.
    double decay_per_sample = 0.0;

    size_t size() const {
        return samples.size();
    }
    double norm() const;
};

/// Spontaneous-emission envelope f(t) ~ exp(-gamma1*t/2) for t >= 0, renormalized on the
/// sample grid. Throws TruncationError if duration < 5/gamma1 and DomainError if dt <= 0.
TemporalMode emission_envelope(const DecayRates &rates, double duration, double dt);

/// Timing of the pulse train inside one control period (all times in seconds).
struct PulseTrainSpec {
    int n_pulses = 2;
    double pulse_period = 700e-9;
    double control_period = 1.6e-6;
    double active_window = 1.4e-6;
    double gauss_sigma = 4e-9;

    /// Throws ValidationError unless n_pulses*pulse_period <= active_window <= control_period.
    void validate() const;
};

struct ModeOutcome {
    std::complex<double> alpha{};  // heterodyne outcome, channel a
    std::complex<double> beta{};   // heterodyne outcome, channel b
    int pulse_index = 0;
};

/// Joint heterodyne density of the two HBT output modes,
///     P(a, b) = exp(-|a|^2 - |b|^2) |c0 + c1 (conj(a) + conj(b))/sqrt(2)|^2 / pi^2
/// for a pure branch c0|0> + c1|1>, mixed branch-wise with vacuum for F < 1.
double joint_heterodyne_density(const PreparedState &state, std::complex<double> alpha, std::complex<double> beta);

/// Acceptance probability of the rejection sampler used for the pure qubit branch.
double rejection_acceptance_rate(const PreparedState &state);

/// One joint heterodyne outcome. Qubit states are drawn in the symmetric/antisymmetric
/// basis u = (a+b)/sqrt(2), v = (a-b)/sqrt(2): v is vacuum and u follows the single-mode
/// Q function, sampled by rejection from a circular Gaussian of twice the variance.
ModeOutcome sample_joint_heterodyne(const PreparedState &state, KeyedStream &rng);

/// Independent outcomes for every slot of the train. Pulse p of shot s draws from the
/// stream keyed (seed, s, p).
std::vector<ModeOutcome> sample_pulse_train(const PreparedState &state, const PulseTrainSpec &spec, uint64_t seed,
                                            uint64_t shot_index);

}  // namespace photonstat

#endif
