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

#ifndef PHOTONSTAT_CORRELATOR_HPP
#define PHOTONSTAT_CORRELATOR_HPP

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "photonstat/detection.hpp"
#include "photonstat/emission.hpp"

namespace photonstat {

/// Lags (in samples) at which the correlations are evaluated: a window of +-w samples
/// around every multiple n*t_p, |n| < n_pulses. Sorted, symmetric, contains 0.
struct LagGrid {
    std::vector<int> lags;
    int slot_samples = 0;
    int window = 0;
    int n_pulses = 0;

    static LagGrid make(int n_pulses, int slot_samples, int window);

    size_t size() const {
        return lags.size();
    }
    /// Index of `lag` in `lags`, or -1.
    int index_of(int lag) const;
    /// Indices of the lags in the window around n*t_p.
    std::vector<size_t> peak_indices(int n) const;

    bool operator==(const LagGrid &other) const = default;
};

enum class BackgroundMode {
    /// G2 = Gamma2 - Gamma2_bg.
    PureNoise,
    /// Additionally removes the signal x noise pairings (see finalize).
    Full,
};

struct CorrelatorConfig {
    LagGrid grid;
    size_t trace_len = 0;
    double dt = 0.0;
    int n_batches = 64;
    uint64_t shots_per_batch = 1;
    double gain = 1.0;  // linear power gain divided out of reported values
    BackgroundMode background = BackgroundMode::Full;
    /// Sorted sample indices t entering the sums over t (the partner sample t+tau is not
    /// restricted). Empty means the whole trace.
    std::vector<int> gate;

    bool same_geometry(const CorrelatorConfig &other) const;
    /// Number of gated t with 0 <= t + lag < trace_len.
    size_t pair_count(int lag) const;
};

/// Neumaier-compensated running sum.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x);
    double value() const {
        return sum + comp;
    }
    /// Order-independent combination: combine(a, b) and combine(b, a) are bit-identical.
    static CompensatedSum combine(const CompensatedSum &a, const CompensatedSum &b);
};

/// Per-lag sums over one trace pair (signal or noise reference), t running over the gate:
///     g1   = sum_t conj(A(t)) B(t+tau)
///     g2   = sum_t Re[conj(A(t) A(t+tau)) B(t+tau) B(t)]
///     paa  = sum_t A(t) A(t+tau),              pbb  = sum_t B(t+tau) B(t)
///     g1r  = sum_t conj(A(t+tau)) B(t),        g1s  = sum_t conj(A(t+tau)) B(t+tau)
///     g1z  = sum_t conj(A(t)) B(t)
/// All but g1 and g2 feed the signal x noise correction.
struct LagSums {
    std::vector<CompensatedSum> g1_re, g1_im, g2, paa_re, paa_im, pbb_re, pbb_im;
    std::vector<CompensatedSum> g1r_re, g1r_im, g1s_re, g1s_im, g1z_re, g1z_im;

    void resize(size_t n);
};

struct BatchSums {
    uint64_t count = 0;
    LagSums sig;
    LagSums bg;
};

/// Plain (uncompensated) per-shot values for one trace pair, as computed by the kernel.
struct ShotLagValues {
    std::vector<std::complex<double>> g1;
    std::vector<double> g2;
    std::vector<std::complex<double>> paa;
    std::vector<std::complex<double>> pbb;
    std::vector<std::complex<double>> g1r;
    std::vector<std::complex<double>> g1s;
    std::vector<std::complex<double>> g1z;
};

/// Evaluates one trace pair on the lag grid in O(|gate| |grid|); an empty gate is the
/// whole trace.
void compute_lag_values(std::span<const std::complex<double>> a, std::span<const std::complex<double>> b,
                        std::span<const int> lags, std::span<const int> gate, ShotLagValues &out);

/// Mergeable running sums of Gamma1/Gamma2 for signal and noise-reference traces, kept per
/// batch of shots for batch-means error bars. Single writer; combine workers with merge().
class CorrelationAccumulator {
   public:
    explicit CorrelationAccumulator(CorrelatorConfig config);

    /// Adds a shot to batch shot_index / shots_per_batch (clamped to the last batch).
    /// Throws GeometryError when trace length or dt differ from the configuration.
    void accumulate_shot(const ShotRecord &shot);
    void accumulate_shot(const ShotRecord &shot, uint32_t batch);

    /// Field-wise sum; batches with the same index are combined. Throws GeometryError on
    /// configuration mismatch.
    static CorrelationAccumulator merge(const CorrelationAccumulator &a, const CorrelationAccumulator &b);

    const CorrelatorConfig &config() const {
        return config_;
    }
    uint64_t n_shots() const;
    const std::map<uint32_t, BatchSums> &batches() const {
        return batches_;
    }

    // Totals over all batches, summed in batch order.
    std::vector<std::complex<double>> g1_sig() const;
    std::vector<std::complex<double>> g1_bg() const;
    std::vector<double> g2_sig() const;
    std::vector<double> g2_bg() const;

   private:
    BatchSums &batch(uint32_t index);

    CorrelatorConfig config_;
    std::map<uint32_t, BatchSums> batches_;
};

struct CorrelationResult {
    std::vector<int> lags;
    double dt = 0.0;
    int slot_samples = 0;
    int window = 0;
    int n_pulses = 0;
    uint64_t n_shots = 0;
    int n_batches = 0;  // non-empty batches used for error bars

    // Background-subtracted, per shot, input-referred (divided by gain and gain^2).
    std::vector<std::complex<double>> g1;
    std::vector<double> g2;
    std::vector<double> stderr_g1_re;
    std::vector<double> stderr_g1_im;
    std::vector<double> stderr_g2;

    std::complex<double> g1_center{};
    double g2_center = 0.0;
    struct SidePoint {
        int n = 0;
        std::complex<double> g1{};
        double g2 = 0.0;
    };
    std::vector<SidePoint> side_points;  // values exactly at tau = n t_p, n != 0

    // Leave-one-batch-out estimates, one row per non-empty batch.
    std::vector<std::vector<std::complex<double>>> jackknife_g1;
    std::vector<std::vector<double>> jackknife_g2;
};

/// Turns the running sums into correlation functions:
///     G1(tau) = (Gamma1_sig - Gamma1_bg) / N
///     G2(tau) = (Gamma2_sig - Gamma2_bg) / N - X(tau)
/// where, in Full mode, X collects the pairings of one signal second moment with one noise
/// second moment. With the stationary noise moments C(d) = E[conj(h_a(t)) h_b(t+d)],
/// Naa(d) = E[conj(h_a(t) h_a(t+d))], Nbb(d) = E[h_b(t+d) h_b(t)] estimated per sample pair
/// from the noise references, and the background-subtracted signal sums S* of the LagSums
/// fields,
///     X(tau) = C(tau) Sg1r(tau) + C(-tau) Sg1(tau) + C(0) [Sg1s(tau) + Sg1z(tau)]
///            + Naa(tau) Spbb(tau) + Nbb(tau) conj(Spaa(tau)).
/// Terms with an odd number of noise factors vanish for zero-mean noise. Throws
/// InsufficientData with no shots, or with fewer than two non-empty batches when error bars
/// are required.
CorrelationResult finalize(const CorrelationAccumulator &acc, bool require_error_bars = true);

struct PeakEntry {
    int n = 0;
    std::complex<double> g1{};
    double g1_re_stderr = 0.0;
    double g1_im_stderr = 0.0;
    double g2 = 0.0;
    double g2_stderr = 0.0;
};

struct PeakTable {
    std::vector<PeakEntry> peaks;  // n = -(N-1) .. N-1, per contributing pulse pair
    double g1_side_mean = 0.0;     // real part, averaged over n != 0
    double g1_side_stderr = 0.0;
    double g2_side_mean = 0.0;
    double g2_side_stderr = 0.0;
    double g2_ratio = 0.0;         // G2 peak at 0 over the mean side peak
    double g2_ratio_stderr = 0.0;  // delete-one-batch jackknife, as are all stderrs

    const PeakEntry &at(int n) const;
};

/// Integrates every peak over its +-w window and divides by the N - |n| pulse pairs that
/// feed it. Throws ConfigError when the lag grid does not sit on the train's pulse period.
PeakTable peak_extract(const CorrelationResult &result, const PulseTrainSpec &spec);

/// Time-resolved first moments folded over the pulse slots of each shot.
struct RabiTrace {
    double dt = 0.0;
    uint64_t n_shots = 0;
    std::vector<std::complex<double>> quadrature;  // <S_a(t)>, phase-rotated
    std::vector<double> quadrature_stderr;         // of the real part
    std::vector<double> cross_power;               // Re <conj(S_b) S_a> - background
    std::vector<double> cross_power_stderr;
    double phase_rotation = 0.0;  // applied to make Im <S_a> ~ 0 at the peak
    size_t quad_peak_index = 0;
    double quad_peak = 0.0;  // signed real part at the largest |<S_a>|
    double quad_peak_stderr = 0.0;
    size_t power_peak_index = 0;
    double power_peak = 0.0;
    double power_peak_stderr = 0.0;
};

/// Streaming, mergeable accumulator behind rabi_traces. Expects demodulated shots.
class RabiAccumulator {
   public:
    RabiAccumulator(int slot_samples, int n_pulses, int n_batches, uint64_t shots_per_batch, double gain);

    /// Adds a shot to batch shot_index / shots_per_batch (clamped to the last batch).
    void accumulate_shot(const ShotRecord &demodulated);
    void accumulate_shot(const ShotRecord &demodulated, uint32_t batch);
    static RabiAccumulator merge(const RabiAccumulator &a, const RabiAccumulator &b);
    RabiTrace finalize() const;

    uint64_t n_shots() const;

   private:
    struct Batch {
        uint64_t count = 0;
        std::vector<CompensatedSum> quad_re, quad_im, power_sig, power_bg;
    };
    Batch &batch(uint32_t index);

    int slot_samples_;
    int n_pulses_;
    int n_batches_;
    uint64_t shots_per_batch_;
    double gain_;
    double dt_ = 0.0;
    std::map<uint32_t, Batch> batches_;
};

/// Averages of raw shots of one preparation: demodulates each shot and folds the pulse slots.
RabiTrace rabi_traces(std::span<const ShotRecord> shots, const TemporalMode &mode, const PulseTrainSpec &spec,
                      const ChainParams &chain, int n_batches = 64);

}  // namespace photonstat

#endif
