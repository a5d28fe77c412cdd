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


#ifndef PHOTONSTAT_PIPELINE_HPP
#define PHOTONSTAT_PIPELINE_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "photonstat/correlator.hpp"
#include "photonstat/detection.hpp"
#include "photonstat/emission.hpp"
#include "photonstat/qubit_model.hpp"

namespace photonstat {

/// Everything needed to turn prepared states into accumulated correlations.
struct HbtSetup {
    DecayRates rates;
    PulseTrainSpec train;
    ChainParams chain;
    TemporalMode mode;
    int window = 3;  // samples on each side of n*t_p
    /// Correlation sums run over t within +-gate_halfwidth samples of each pulse start;
    /// negative means the whole trace.
    int gate_halfwidth = 0;
    int n_batches = 64;
    BackgroundMode background = BackgroundMode::Full;

    /// Validates all parts and derives the emission mode. Throws ValidationError or
    /// ConfigError on inconsistent geometry.
    static HbtSetup make(const QubitParams &qubit, const PulseTrainSpec &train, const ChainParams &chain);

    int slot_samples() const;
    std::vector<int> gate() const;
    uint64_t shots_per_batch(uint64_t n_shots) const;
    CorrelatorConfig correlator_config(uint64_t n_shots) const;
    RabiAccumulator rabi_accumulator(uint64_t n_shots) const;
};

/// Emission mode of one slot: starts after the preparation pulse (4 sigma, rounded up to
/// whole samples) and runs to the end of the slot.
TemporalMode emission_mode(const DecayRates &rates, const PulseTrainSpec &train, const ChainParams &chain);

/// Raw (undemodulated) record of one shot.
ShotRecord simulate_shot(const HbtSetup &setup, const PreparedState &state, uint64_t seed, uint64_t shot_index);

/// Receives every raw shot. Called concurrently from the workers.
using ShotSink = std::function<void(const ShotRecord &)>;

struct HbtAccumulators {
    CorrelationAccumulator correlation;
    RabiAccumulator rabi;
};

/// Simulates shots [0, n_shots). Batches are dealt to workers in contiguous blocks and
/// merged in batch order, so the result does not depend on the worker count.
HbtAccumulators simulate_hbt(const HbtSetup &setup, const PreparedState &state, uint64_t n_shots, uint64_t seed,
                             int workers = 1, const ShotSink &sink = {});

/// Resolves the worker count: PHOTONSTAT_THREADS when set, else `requested`, at least 1.
int resolve_workers(int requested);

}  // namespace photonstat

#endif
