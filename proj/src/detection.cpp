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

#include "photonstat/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "photonstat/errors.hpp"

namespace photonstat {

namespace {

// exp(sign * i 2 pi f k dt) for k in [0, n). Cached per thread: shots of one run share it.
const std::vector<std::complex<double>> &phasor_table(size_t n, double freq, double dt, int sign) {
    struct Cache {
        size_t n = 0;
        double freq = 0.0;
        double dt = 0.0;
        int sign = 0;
        std::vector<std::complex<double>> table;
    };
    thread_local Cache cache[2];
    Cache &c = cache[sign > 0 ? 0 : 1];
    if (c.n != n || c.freq != freq || c.dt != dt || c.sign != sign) {
        c.n = n;
        c.freq = freq;
        c.dt = dt;
        c.sign = sign;
        c.table.resize(n);
        for (size_t k = 0; k < n; ++k) {
            // Reduce the phase in cycles first so long traces keep full precision.
            double cycles = std::fmod(freq * dt * static_cast<double>(k), 1.0);
            c.table[k] = std::polar(1.0, sign * 2.0 * std::numbers::pi * cycles);
        }
    }
    return c.table;
}

bool nearly_integer(double x, double tol = 1e-6) {
    return std::fabs(x - std::round(x)) <= tol * std::max(1.0, std::fabs(x));
}

void check_geometry(size_t n_outcomes, const TemporalMode &mode, const PulseTrainSpec &spec,
                    const ChainParams &chain) {
    auto fail = [](const std::string &msg) { throw ConfigError("synthesize_shot: " + msg); };
    if (n_outcomes != static_cast<size_t>(spec.n_pulses)) {
        fail("outcome count does not match n_pulses");
    }
    if (std::fabs(mode.dt - chain.dt()) > 1e-9 * chain.dt()) {
        fail("mode dt differs from the sampling interval");
    }
    double slot = spec.pulse_period / chain.dt();
    if (!nearly_integer(slot)) {
        fail("pulse_period is not a whole number of samples");
    }
    auto slot_samples = static_cast<size_t>(std::llround(slot));
    size_t origin = pulse_start_sample(mode, spec.pulse_period, 0);
    if (origin + mode.size() > slot_samples) {
        fail("temporal mode does not fit inside one pulse slot");
    }
    if (static_cast<size_t>(spec.n_pulses) * slot_samples > static_cast<size_t>(chain.trace_len)) {
        fail("pulse train is longer than the trace");
    }
}

}  // namespace

ChainParams ChainParams::twpa_preset() {
    return ChainParams{};
}

ChainParams ChainParams::hemt_preset() {
    ChainParams c;
    c.n_add_a = 15.0;
    c.n_add_b = 15.0;
    return c;
}

double ChainParams::gain() const {
    return std::pow(10.0, gain_db / 10.0);
}

void ChainParams::validate(const PulseTrainSpec &train) const {
    auto fail = [](const std::string &msg) { throw ValidationError("chain: " + msg); };
    if (!(n_add_a >= 0) || !(n_add_b >= 0)) {
        fail("n_add must be non-negative");
    }
    if (!std::isfinite(gain_db)) {
        fail("gain_db must be finite");
    }
    if (!(sample_rate > 0)) {
        fail("sample_rate must be positive");
    }
    if (!(std::fabs(if_freq) < sample_rate / 2)) {
        std::ostringstream ss;
        ss << "if_freq " << if_freq / 1e6 << " MHz is not below Nyquist (" << sample_rate / 2e6 << " MHz)";
        fail(ss.str());
    }
    if (trace_len < 1) {
        fail("trace_len must be positive");
    }
    if (static_cast<double>(trace_len) * dt() < train.control_period * (1 - 1e-9)) {
        fail("trace_len * dt is shorter than the control period");
    }
}

void ShotRecord::check_consistent() const {
    for (const IQTrace *t : {&sig_b, &noise_a, &noise_b}) {
        if (t->size() != sig_a.size() || t->dt != sig_a.dt) {
            throw GeometryError("shot record traces differ in length or dt");
        }
    }
}

size_t pulse_start_sample(const TemporalMode &mode, double pulse_period, int pulse_index) {
    double start = (pulse_period * pulse_index + mode.origin) / mode.dt;
    return static_cast<size_t>(std::llround(start));
}

ShotRecord synthesize_shot(std::span<const ModeOutcome> outcomes, const TemporalMode &mode,
                           const PulseTrainSpec &spec, const ChainParams &chain, uint64_t seed,
                           uint64_t shot_index) {
    check_geometry(outcomes.size(), mode, spec, chain);

    const auto n = static_cast<size_t>(chain.trace_len);
    const double dt = chain.dt();
    const double amp = std::sqrt(chain.gain());

    ShotRecord shot;
    shot.shot_index = shot_index;
    IQTrace *traces[4] = {&shot.sig_a, &shot.sig_b, &shot.noise_a, &shot.noise_b};
    const double n_add[4] = {chain.n_add_a, chain.n_add_b, chain.n_add_a, chain.n_add_b};

    thread_local std::vector<double> re;
    thread_local std::vector<double> im;
    re.resize(n);
    im.resize(n);
    for (int slot = 0; slot < 4; ++slot) {
        IQTrace &t = *traces[slot];
        t.dt = dt;
        t.channel = slot % 2 == 0 ? Channel::A : Channel::B;
        t.kind = slot < 2 ? TraceKind::Signal : TraceKind::NoiseRef;
        t.samples.resize(n);
        double variance = chain.gain() * n_add[slot] / dt;
        if (variance > 0) {
            KeyedStream rng(seed, shot_index, kTraceStreamBase + static_cast<uint32_t>(slot));
            rng.fill_complex_normal(re, im, variance);
            for (size_t k = 0; k < n; ++k) {
                t.samples[k] = {re[k], im[k]};
            }
        } else {
            std::fill(t.samples.begin(), t.samples.end(), std::complex<double>{});
        }
    }

    const std::vector<std::complex<double>> *carrier =
        chain.if_enabled && chain.if_freq != 0.0 ? &phasor_table(n, chain.if_freq, dt, +1) : nullptr;
    for (const ModeOutcome &o : outcomes) {
        size_t start = pulse_start_sample(mode, spec.pulse_period, o.pulse_index);
        std::complex<double> a = amp * o.alpha;
        std::complex<double> b = amp * o.beta;
        for (size_t j = 0; j < mode.size() && start + j < n; ++j) {
            size_t k = start + j;
            std::complex<double> f = mode.samples[j];
            if (carrier) {
                f *= (*carrier)[k];
            }
            shot.sig_a.samples[k] += a * f;
            shot.sig_b.samples[k] += b * f;
        }
    }
    return shot;
}

std::complex<double> matched_filter(const IQTrace &trace, const TemporalMode &mode, double pulse_period,
                                    int pulse_index, double if_freq) {
    if (pulse_index < 0) {
        throw WindowError("matched_filter: negative pulse index");
    }
    size_t start = pulse_start_sample(mode, pulse_period, pulse_index);
    if (start + mode.size() > trace.size()) {
        std::ostringstream ss;
        ss << "matched_filter: pulse " << pulse_index << " window [" << start << ", " << start + mode.size()
           << ") leaves the " << trace.size() << "-sample trace";
        throw WindowError(ss.str());
    }
    std::complex<double> acc{};
    for (size_t j = 0; j < mode.size(); ++j) {
        size_t k = start + j;
        std::complex<double> s = trace.samples[k];
        if (if_freq != 0.0) {
            double cycles = std::fmod(if_freq * trace.dt * static_cast<double>(k), 1.0);
            s *= std::polar(1.0, -2.0 * std::numbers::pi * cycles);
        }
        acc += std::conj(mode.samples[j]) * s;
    }
    return acc * trace.dt / mode.norm();
}

IQTrace digital_downconvert(const IQTrace &trace, double if_freq) {
    if (!(trace.dt > 0)) {
        throw ConfigError("digital_downconvert: trace dt must be positive");
    }
    if (!(std::fabs(if_freq) < 0.5 / trace.dt)) {
        throw ConfigError("digital_downconvert: if_freq is not below Nyquist");
    }
    IQTrace out = trace;
    if (if_freq == 0.0) {
        return out;
    }
    const auto &table = phasor_table(trace.size(), if_freq, trace.dt, -1);
    for (size_t k = 0; k < out.size(); ++k) {
        out.samples[k] *= table[k];
    }
    return out;
}

IQTrace mode_filter(const IQTrace &trace, const TemporalMode &mode) {
    IQTrace out;
    out.dt = trace.dt;
    out.channel = trace.channel;
    out.kind = trace.kind;
    const size_t n = trace.size();
    const size_t taps = mode.size();
    out.samples.assign(n, std::complex<double>{});
    if (taps == 0 || n == 0) {
        return out;
    }
    const auto &x = trace.samples;
    auto &y = out.samples;
    const double rho = mode.decay_per_sample;
    const bool exponential = rho > 0.0 && mode.samples[0].imag() == 0.0;
    if (exponential) {
        // f_j = f_0 rho^j: y(k) = f_0 x(k) dt + rho y(k+1) - f_0 rho^taps x(k+taps) dt
        const double c = mode.samples[0].real() * trace.dt;
        const double tail = c * std::pow(rho, static_cast<double>(taps));
        std::complex<double> acc{};
        for (size_t k = n; k-- > 0;) {
            acc = c * x[k] + rho * acc;
            if (k + taps < n) {
                acc -= tail * x[k + taps];
            }
            y[k] = acc;
        }
        return out;
    }
    for (size_t k = 0; k < n; ++k) {
        std::complex<double> acc{};
        size_t len = std::min(taps, n - k);
        for (size_t j = 0; j < len; ++j) {
            acc += std::conj(mode.samples[j]) * x[k + j];
        }
        y[k] = acc * trace.dt;
    }
    return out;
}

ShotRecord demodulate_shot(const ShotRecord &shot, const TemporalMode &mode, const ChainParams &chain) {
    shot.check_consistent();
    double f_if = chain.if_enabled ? chain.if_freq : 0.0;
    ShotRecord out;
    out.shot_index = shot.shot_index;
    const IQTrace *in[4] = {&shot.sig_a, &shot.sig_b, &shot.noise_a, &shot.noise_b};
    IQTrace *dst[4] = {&out.sig_a, &out.sig_b, &out.noise_a, &out.noise_b};
    for (int i = 0; i < 4; ++i) {
        // Signal and noise references go through the same processing.
        *dst[i] = mode_filter(digital_downconvert(*in[i], f_if), mode);
    }
    return out;
}

}  // namespace photonstat
