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


#include "photonstat/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "photonstat/errors.hpp"

namespace photonstat {

TemporalMode emission_mode(const DecayRates &rates, const PulseTrainSpec &train, const ChainParams &chain) {
    const double dt = chain.dt();
    const double origin = std::ceil(4.0 * train.gauss_sigma / dt - 1e-9) * dt;
    TemporalMode mode = emission_envelope(rates, train.pulse_period - origin, dt);
    mode.origin = origin;
    return mode;
}

HbtSetup HbtSetup::make(const QubitParams &qubit, const PulseTrainSpec &train, const ChainParams &chain) {
    qubit.validate();
    train.validate();
    chain.validate(train);
    HbtSetup s;
    s.rates = DecayRates::from_params(qubit);
    s.train = train;
    s.chain = chain;
    s.mode = emission_mode(s.rates, train, chain);
    return s;
}

int HbtSetup::slot_samples() const {
    return static_cast<int>(std::llround(train.pulse_period / chain.dt()));
}

std::vector<int> HbtSetup::gate() const {
    std::vector<int> g;
    if (gate_halfwidth < 0) {
        return g;
    }
    for (int p = 0; p < train.n_pulses; ++p) {
        auto start = static_cast<int>(pulse_start_sample(mode, train.pulse_period, p));
        for (int j = -gate_halfwidth; j <= gate_halfwidth; ++j) {
            int t = start + j;
            if (t >= 0 && t < chain.trace_len && (g.empty() || t > g.back())) {
                g.push_back(t);
            }
        }
    }
    return g;
}

uint64_t HbtSetup::shots_per_batch(uint64_t n_shots) const {
    auto b = static_cast<uint64_t>(n_batches);
    return std::max<uint64_t>(1, (n_shots + b - 1) / b);
}

CorrelatorConfig HbtSetup::correlator_config(uint64_t n_shots) const {
    CorrelatorConfig c;
    c.grid = LagGrid::make(train.n_pulses, slot_samples(), window);
    c.trace_len = static_cast<size_t>(chain.trace_len);
    c.dt = chain.dt();
    c.n_batches = n_batches;
    c.shots_per_batch = shots_per_batch(n_shots);
    c.gain = chain.gain();
    c.background = background;
    c.gate = gate();
    return c;
}

RabiAccumulator HbtSetup::rabi_accumulator(uint64_t n_shots) const {
    return RabiAccumulator(slot_samples(), train.n_pulses, n_batches, shots_per_batch(n_shots), chain.gain());
}

ShotRecord simulate_shot(const HbtSetup &setup, const PreparedState &state, uint64_t seed, uint64_t shot_index) {
    auto outcomes = sample_pulse_train(state, setup.train, seed, shot_index);
    return synthesize_shot(outcomes, setup.mode, setup.train, setup.chain, seed, shot_index);
}

HbtAccumulators simulate_hbt(const HbtSetup &setup, const PreparedState &state, uint64_t n_shots, uint64_t seed,
                             int workers, const ShotSink &sink) {
    const uint64_t per_batch = setup.shots_per_batch(n_shots);
    const auto n_batches = static_cast<uint64_t>(setup.n_batches);
    workers = static_cast<int>(std::clamp<uint64_t>(static_cast<uint64_t>(std::max(workers, 1)), 1, n_batches));

    std::vector<HbtAccumulators> partial;
    partial.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        partial.push_back({CorrelationAccumulator(setup.correlator_config(n_shots)), setup.rabi_accumulator(n_shots)});
    }
    std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));

    auto run = [&](int w) {
        try {
            uint64_t b0 = n_batches * static_cast<uint64_t>(w) / static_cast<uint64_t>(workers);
            uint64_t b1 = n_batches * static_cast<uint64_t>(w + 1) / static_cast<uint64_t>(workers);
            uint64_t first = std::min(b0 * per_batch, n_shots);
            uint64_t last = w + 1 == workers ? n_shots : std::min(b1 * per_batch, n_shots);
            HbtAccumulators &acc = partial[static_cast<size_t>(w)];
            for (uint64_t i = first; i < last; ++i) {
                ShotRecord raw = simulate_shot(setup, state, seed, i);
                if (sink) {
                    sink(raw);
                }
                ShotRecord shot = demodulate_shot(raw, setup.mode, setup.chain);
                acc.correlation.accumulate_shot(shot);
                acc.rabi.accumulate_shot(shot);
            }
        } catch (...) {
            errors[static_cast<size_t>(w)] = std::current_exception();
        }
    };

    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < workers; ++w) {
            threads.emplace_back(run, w);
        }
        for (auto &t : threads) {
            t.join();
        }
    }
    for (auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    HbtAccumulators out = std::move(partial[0]);
    for (size_t w = 1; w < partial.size(); ++w) {
        out.correlation = CorrelationAccumulator::merge(out.correlation, partial[w].correlation);
        out.rabi = RabiAccumulator::merge(out.rabi, partial[w].rabi);
    }
    return out;
}

int resolve_workers(int requested) {
    if (const char *env = std::getenv("PHOTONSTAT_THREADS")) {
        try {
            int n = std::stoi(env);
            if (n >= 1) {
                return n;
            }
        } catch (const std::exception &) {
        }
        throw ValidationError("PHOTONSTAT_THREADS must be a positive integer");
    }
    return std::max(requested, 1);
}

}  // namespace photonstat
