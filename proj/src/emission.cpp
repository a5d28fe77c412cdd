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

#include "photonstat/emission.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "photonstat/errors.hpp"

namespace photonstat {

namespace {

constexpr double kSqrtHalf = 0.70710678118654752440;

struct QubitAmplitudes {
    double c0;
    double c1;
};

QubitAmplitudes amplitudes(const PreparedState &state) {
    return {std::cos(state.theta_r / 2.0), std::sin(state.theta_r / 2.0)};
}

// sup_r 2 exp(-r^2/2) (|c0| + |c1| r)^2, the envelope constant for the rejection step.
double rejection_bound(QubitAmplitudes amp) {
    double a = std::fabs(amp.c0);
    double b = std::fabs(amp.c1);
    if (b == 0.0) {
        return 2.0 * a * a;
    }
    double r = (-a + std::sqrt(a * a + 8.0 * b * b)) / (2.0 * b);
    double v = a + b * r;
    return 2.0 * std::exp(-r * r / 2.0) * v * v;
}

std::complex<double> sample_q_function(QubitAmplitudes amp, double bound, KeyedStream &rng) {
    // Envelope: circular Gaussian with E|u|^2 = 2, density exp(-|u|^2/2) / (2 pi).
    for (;;) {
        std::complex<double> u = std::sqrt(2.0) * rng.complex_normal();
        std::complex<double> amplitude = amp.c0 + amp.c1 * std::conj(u);
        double ratio = 2.0 * std::exp(-std::norm(u) / 2.0) * std::norm(amplitude);
        if (rng.uniform() * bound <= ratio) {
            return u;
        }
    }
}

}  // namespace

double PreparedState::mean_photons() const {
    switch (kind) {
        case StateKind::QubitSuperposition: {
            double s = std::sin(theta_r / 2.0);
            return fidelity * s * s;
        }
        case StateKind::Coherent:
            return std::norm(alpha);
        case StateKind::Vacuum:
            return 0.0;
    }
    return 0.0;
}

std::complex<double> PreparedState::mean_field() const {
    switch (kind) {
        case StateKind::QubitSuperposition:
            return fidelity * std::sin(theta_r) / 2.0;
        case StateKind::Coherent:
            return alpha;
        case StateKind::Vacuum:
            return 0.0;
    }
    return 0.0;
}

double PreparedState::second_factorial_moment() const {
    return kind == StateKind::Coherent ? std::norm(alpha) * std::norm(alpha) : 0.0;
}

PreparedState prepare_state(double theta_r, double fidelity) {
    if (!std::isfinite(theta_r)) {
        throw DomainError("theta_r must be finite");
    }
    if (!(fidelity >= 0.0 && fidelity <= 1.0)) {
        std::ostringstream ss;
        ss << "fidelity " << fidelity << " is outside [0, 1]";
        throw DomainError(ss.str());
    }
    PreparedState s;
    s.kind = StateKind::QubitSuperposition;
    s.theta_r = theta_r;
    s.fidelity = fidelity;
    return s;
}

PreparedState coherent_state(std::complex<double> alpha) {
    if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) {
        throw DomainError("coherent amplitude must be finite");
    }
    PreparedState s;
    s.kind = StateKind::Coherent;
    s.alpha = alpha;
    return s;
}

PreparedState vacuum_state() {
    return PreparedState{};
}

double TemporalMode::norm() const {
    double acc = 0.0;
    for (auto v : samples) {
        acc += std::norm(v);
    }
    return acc * dt;
}

TemporalMode emission_envelope(const DecayRates &rates, double duration, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw DomainError("emission_envelope: dt must be positive");
    }
    double gamma = rates.gamma1_per_second();
    if (!(gamma > 0.0)) {
        throw DomainError("emission_envelope: gamma1 must be positive");
    }
    if (duration * gamma < 5.0) {
        std::ostringstream ss;
        ss << "emission_envelope: duration " << duration * 1e9 << " ns is shorter than 5/gamma1 = " << 5e9 / gamma
           << " ns";
        throw TruncationError(ss.str());
    }
    auto n = static_cast<size_t>(std::floor(duration / dt + 1e-9));
    TemporalMode mode;
    mode.dt = dt;
    mode.samples.resize(n);
    mode.decay_per_sample = std::exp(-gamma * dt / 2.0);
    double acc = 0.0;
    for (size_t k = 0; k < n; ++k) {
        double v = std::exp(-gamma * static_cast<double>(k) * dt / 2.0);
        mode.samples[k] = v;
        acc += v * v;
    }
    double scale = 1.0 / std::sqrt(acc * dt);
    for (auto &v : mode.samples) {
        v *= scale;
    }
    return mode;
}

void PulseTrainSpec::validate() const {
    auto fail = [](const std::string &msg) { throw ValidationError("train: " + msg); };
    if (n_pulses < 1) {
        fail("n_pulses must be at least 1");
    }
    if (!(pulse_period > 0) || !(control_period > 0) || !(active_window > 0) || !(gauss_sigma >= 0)) {
        fail("periods and windows must be positive");
    }
    if (active_window > control_period * (1 + 1e-12)) {
        fail("active_window exceeds control_period");
    }
    if (n_pulses * pulse_period > active_window * (1 + 1e-12)) {
        std::ostringstream ss;
        ss << n_pulses << " pulses of " << pulse_period * 1e9 << " ns do not fit the " << active_window * 1e9
           << " ns active window";
        fail(ss.str());
    }
}

double joint_heterodyne_density(const PreparedState &state, std::complex<double> alpha, std::complex<double> beta) {
    double gauss = std::exp(-std::norm(alpha) - std::norm(beta)) / (std::numbers::pi * std::numbers::pi);
    switch (state.kind) {
        case StateKind::Vacuum:
            return gauss;
        case StateKind::Coherent: {
            std::complex<double> centre = state.alpha * kSqrtHalf;
            return std::exp(-std::norm(alpha - centre) - std::norm(beta - centre)) /
                   (std::numbers::pi * std::numbers::pi);
        }
        case StateKind::QubitSuperposition: {
            auto amp = amplitudes(state);
            double pure = std::norm(amp.c0 + amp.c1 * (std::conj(alpha) + std::conj(beta)) * kSqrtHalf);
            return gauss * (state.fidelity * pure + (1.0 - state.fidelity));
        }
    }
    return 0.0;
}

double rejection_acceptance_rate(const PreparedState &state) {
    if (state.kind != StateKind::QubitSuperposition) {
        return 1.0;
    }
    return 1.0 / rejection_bound(amplitudes(state));
}

ModeOutcome sample_joint_heterodyne(const PreparedState &state, KeyedStream &rng) {
    ModeOutcome out;
    std::complex<double> u;
    switch (state.kind) {
        case StateKind::Vacuum:
            u = rng.complex_normal();
            break;
        case StateKind::Coherent:
            u = state.alpha + rng.complex_normal();
            break;
        case StateKind::QubitSuperposition: {
            bool pure_branch = state.fidelity >= 1.0 || rng.uniform() < state.fidelity;
            if (pure_branch) {
                auto amp = amplitudes(state);
                u = sample_q_function(amp, rejection_bound(amp), rng);
            } else {
                u = rng.complex_normal();
            }
            break;
        }
    }
    std::complex<double> v = rng.complex_normal();
    out.alpha = (u + v) * kSqrtHalf;
    out.beta = (u - v) * kSqrtHalf;
    return out;
}

std::vector<ModeOutcome> sample_pulse_train(const PreparedState &state, const PulseTrainSpec &spec, uint64_t seed,
                                            uint64_t shot_index) {
    std::vector<ModeOutcome> outcomes;
    outcomes.reserve(static_cast<size_t>(spec.n_pulses));
    for (int p = 0; p < spec.n_pulses; ++p) {
        KeyedStream rng(seed, shot_index, kPulseStreamBase + static_cast<uint32_t>(p));
        ModeOutcome o = sample_joint_heterodyne(state, rng);
        o.pulse_index = p;
        outcomes.push_back(o);
    }
    return outcomes;
}

}  // namespace photonstat
