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


#include "photonstat/correlator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <tuple>

#include "photonstat/errors.hpp"

namespace photonstat {

namespace {

using cplx = std::complex<double>;

uint32_t batch_of(uint64_t shot_index, uint64_t shots_per_batch, int n_batches) {
    uint64_t b = shot_index / std::max<uint64_t>(shots_per_batch, 1);
    return static_cast<uint32_t>(std::min<uint64_t>(b, static_cast<uint64_t>(n_batches - 1)));
}

void combine_into(std::vector<CompensatedSum> &dst, const std::vector<CompensatedSum> &a,
                  const std::vector<CompensatedSum> &b) {
    dst.resize(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        dst[i] = CompensatedSum::combine(a[i], b[i]);
    }
}

LagSums combine(const LagSums &a, const LagSums &b) {
    LagSums out;
    combine_into(out.g1_re, a.g1_re, b.g1_re);
    combine_into(out.g1_im, a.g1_im, b.g1_im);
    combine_into(out.g2, a.g2, b.g2);
    combine_into(out.paa_re, a.paa_re, b.paa_re);
    combine_into(out.paa_im, a.paa_im, b.paa_im);
    combine_into(out.pbb_re, a.pbb_re, b.pbb_re);
    combine_into(out.pbb_im, a.pbb_im, b.pbb_im);
    combine_into(out.g1r_re, a.g1r_re, b.g1r_re);
    combine_into(out.g1r_im, a.g1r_im, b.g1r_im);
    combine_into(out.g1s_re, a.g1s_re, b.g1s_re);
    combine_into(out.g1s_im, a.g1s_im, b.g1s_im);
    combine_into(out.g1z_re, a.g1z_re, b.g1z_re);
    combine_into(out.g1z_im, a.g1z_im, b.g1z_im);
    return out;
}

void add_values(LagSums &sums, const ShotLagValues &v) {
    for (size_t l = 0; l < v.g2.size(); ++l) {
        sums.g1_re[l].add(v.g1[l].real());
        sums.g1_im[l].add(v.g1[l].imag());
        sums.g2[l].add(v.g2[l]);
        sums.paa_re[l].add(v.paa[l].real());
        sums.paa_im[l].add(v.paa[l].imag());
        sums.pbb_re[l].add(v.pbb[l].real());
        sums.pbb_im[l].add(v.pbb[l].imag());
        sums.g1r_re[l].add(v.g1r[l].real());
        sums.g1r_im[l].add(v.g1r[l].imag());
        sums.g1s_re[l].add(v.g1s[l].real());
        sums.g1s_im[l].add(v.g1s[l].imag());
        sums.g1z_re[l].add(v.g1z[l].real());
        sums.g1z_im[l].add(v.g1z[l].imag());
    }
}

// Plain-double view of one trace pair's sums.
struct PairMoments {
    std::vector<cplx> g1, paa, pbb, g1r, g1s, g1z;
    std::vector<double> g2;

    explicit PairMoments(size_t n = 0) : g1(n), paa(n), pbb(n), g1r(n), g1s(n), g1z(n), g2(n) {}

    void add(const LagSums &s, double sign) {
        auto value = [](const std::vector<CompensatedSum> &re, const std::vector<CompensatedSum> &im, size_t l) {
            return cplx(re[l].value(), im[l].value());
        };
        for (size_t l = 0; l < g2.size(); ++l) {
            g1[l] += sign * value(s.g1_re, s.g1_im, l);
            paa[l] += sign * value(s.paa_re, s.paa_im, l);
            pbb[l] += sign * value(s.pbb_re, s.pbb_im, l);
            g1r[l] += sign * value(s.g1r_re, s.g1r_im, l);
            g1s[l] += sign * value(s.g1s_re, s.g1s_im, l);
            g1z[l] += sign * value(s.g1z_re, s.g1z_im, l);
            g2[l] += sign * s.g2[l].value();
        }
    }
};

struct Moments {
    double count = 0;
    PairMoments sig, bg;

    explicit Moments(size_t n) : sig(n), bg(n) {}

    void add(const BatchSums &b, double sign) {
        count += sign * static_cast<double>(b.count);
        sig.add(b.sig, sign);
        bg.add(b.bg, sign);
    }
};

struct Estimate {
    std::vector<cplx> g1;
    std::vector<double> g2;
};

Estimate estimate(const Moments &m, const CorrelatorConfig &cfg) {
    const LagGrid &grid = cfg.grid;
    const size_t n_lags = grid.size();
    const double n = m.count;
    Estimate e;
    e.g1.resize(n_lags);
    e.g2.resize(n_lags);

    // Noise moments per sample pair.
    std::vector<cplx> c(n_lags), naa(n_lags), nbb(n_lags);
    for (size_t l = 0; l < n_lags; ++l) {
        double pairs = n * static_cast<double>(cfg.pair_count(grid.lags[l]));
        c[l] = pairs > 0 ? m.bg.g1[l] / pairs : cplx{};
        naa[l] = pairs > 0 ? std::conj(m.bg.paa[l]) / pairs : cplx{};
        nbb[l] = pairs > 0 ? m.bg.pbb[l] / pairs : cplx{};
    }
    const auto zero = static_cast<size_t>(grid.index_of(0));
    const double gain = cfg.gain;
    for (size_t l = 0; l < n_lags; ++l) {
        auto sig = [&](const std::vector<cplx> PairMoments::*field) {
            return ((m.sig.*field)[l] - (m.bg.*field)[l]) / n;
        };
        double g2 = (m.sig.g2[l] - m.bg.g2[l]) / n;
        if (cfg.background == BackgroundMode::Full) {
            const auto neg = static_cast<size_t>(grid.index_of(-grid.lags[l]));
            cplx x = c[l] * sig(&PairMoments::g1r) + c[neg] * sig(&PairMoments::g1) +
                     c[zero] * (sig(&PairMoments::g1s) + sig(&PairMoments::g1z)) +
                     naa[l] * sig(&PairMoments::pbb) + nbb[l] * std::conj(sig(&PairMoments::paa));
            g2 -= x.real();
        }
        const cplx s1 = sig(&PairMoments::g1);
        e.g1[l] = s1 / gain;
        e.g2[l] = g2 / (gain * gain);
    }
    return e;
}

double jackknife_stderr(const std::vector<double> &leave_one_out) {
    const size_t b = leave_one_out.size();
    if (b < 2) {
        return std::nan("");
    }
    double mean = 0.0;
    for (double v : leave_one_out) {
        mean += v;
    }
    mean /= static_cast<double>(b);
    double ss = 0.0;
    for (double v : leave_one_out) {
        ss += (v - mean) * (v - mean);
    }
    return std::sqrt(ss * static_cast<double>(b - 1) / static_cast<double>(b));
}

}  // namespace

LagGrid LagGrid::make(int n_pulses, int slot_samples, int window) {
    if (n_pulses < 1 || slot_samples < 1 || window < 0) {
        throw ConfigError("lag grid: n_pulses and slot_samples must be positive, window non-negative");
    }
    if (2 * window >= slot_samples) {
        throw ConfigError("lag grid: peak windows overlap");
    }
    LagGrid g;
    g.slot_samples = slot_samples;
    g.window = window;
    g.n_pulses = n_pulses;
    for (int n = -(n_pulses - 1); n <= n_pulses - 1; ++n) {
        for (int d = -window; d <= window; ++d) {
            g.lags.push_back(n * slot_samples + d);
        }
    }
    return g;
}

int LagGrid::index_of(int lag) const {
    auto it = std::lower_bound(lags.begin(), lags.end(), lag);
    if (it == lags.end() || *it != lag) {
        return -1;
    }
    return static_cast<int>(it - lags.begin());
}

std::vector<size_t> LagGrid::peak_indices(int n) const {
    std::vector<size_t> out;
    for (int d = -window; d <= window; ++d) {
        int idx = index_of(n * slot_samples + d);
        if (idx >= 0) {
            out.push_back(static_cast<size_t>(idx));
        }
    }
    return out;
}

bool CorrelatorConfig::same_geometry(const CorrelatorConfig &other) const {
    return grid == other.grid && trace_len == other.trace_len && dt == other.dt && n_batches == other.n_batches &&
           shots_per_batch == other.shots_per_batch && gain == other.gain && background == other.background &&
           gate == other.gate;
}

size_t CorrelatorConfig::pair_count(int lag) const {
    const auto n = static_cast<long>(trace_len);
    const long t0 = std::max(0L, static_cast<long>(-lag));
    const long t1 = std::min(n, n - lag);
    if (t1 <= t0) {
        return 0;
    }
    if (gate.empty()) {
        return static_cast<size_t>(t1 - t0);
    }
    auto lo = std::lower_bound(gate.begin(), gate.end(), t0);
    auto hi = std::lower_bound(gate.begin(), gate.end(), t1);
    return static_cast<size_t>(hi - lo);
}

void CompensatedSum::add(double x) {
    double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) {
        comp += (sum - t) + x;
    } else {
        comp += (x - t) + sum;
    }
    sum = t;
}

CompensatedSum CompensatedSum::combine(const CompensatedSum &a, const CompensatedSum &b) {
    const bool swap = std::tie(b.sum, b.comp) < std::tie(a.sum, a.comp);
    const CompensatedSum &lo = swap ? b : a;
    const CompensatedSum &hi = swap ? a : b;
    CompensatedSum out = lo;
    out.add(hi.sum);
    out.comp += hi.comp;
    return out;
}

void LagSums::resize(size_t n) {
    for (auto *v : {&g1_re, &g1_im, &g2, &paa_re, &paa_im, &pbb_re, &pbb_im, &g1r_re, &g1r_im, &g1s_re, &g1s_im,
                    &g1z_re, &g1z_im}) {
        v->assign(n, CompensatedSum{});
    }
}

CorrelationAccumulator::CorrelationAccumulator(CorrelatorConfig config) : config_(std::move(config)) {
    if (config_.n_batches < 1) {
        throw ConfigError("correlator: n_batches must be positive");
    }
    if (config_.grid.lags.empty() || config_.grid.index_of(0) < 0) {
        throw ConfigError("correlator: lag grid must contain lag 0");
    }
    for (int lag : config_.grid.lags) {
        if (config_.grid.index_of(-lag) < 0) {
            throw ConfigError("correlator: lag grid must be symmetric");
        }
        if (static_cast<size_t>(std::abs(lag)) >= config_.trace_len) {
            throw ConfigError("correlator: lag exceeds the trace length");
        }
    }
    if (!(config_.gain > 0)) {
        throw ConfigError("correlator: gain must be positive");
    }
    for (size_t i = 0; i < config_.gate.size(); ++i) {
        if (config_.gate[i] < 0 || static_cast<size_t>(config_.gate[i]) >= config_.trace_len ||
            (i > 0 && config_.gate[i] <= config_.gate[i - 1])) {
            throw ConfigError("correlator: gate must be strictly increasing sample indices inside the trace");
        }
    }
}

BatchSums &CorrelationAccumulator::batch(uint32_t index) {
    auto it = batches_.find(index);
    if (it == batches_.end()) {
        it = batches_.emplace(index, BatchSums{}).first;
        it->second.sig.resize(config_.grid.size());
        it->second.bg.resize(config_.grid.size());
    }
    return it->second;
}

void CorrelationAccumulator::accumulate_shot(const ShotRecord &shot) {
    accumulate_shot(shot, batch_of(shot.shot_index, config_.shots_per_batch, config_.n_batches));
}

void CorrelationAccumulator::accumulate_shot(const ShotRecord &shot, uint32_t batch_index) {
    shot.check_consistent();
    if (shot.sig_a.size() != config_.trace_len ||
        std::fabs(shot.sig_a.dt - config_.dt) > 1e-12 * std::fabs(config_.dt)) {
        std::ostringstream ss;
        ss << "correlator: shot of " << shot.sig_a.size() << " samples at dt " << shot.sig_a.dt
           << " does not match the configured " << config_.trace_len << " samples at dt " << config_.dt;
        throw GeometryError(ss.str());
    }
    if (batch_index >= static_cast<uint32_t>(config_.n_batches)) {
        throw ConfigError("correlator: batch index out of range");
    }
    thread_local ShotLagValues values;
    BatchSums &b = batch(batch_index);
    compute_lag_values(shot.sig_a.samples, shot.sig_b.samples, config_.grid.lags, config_.gate, values);
    add_values(b.sig, values);
    compute_lag_values(shot.noise_a.samples, shot.noise_b.samples, config_.grid.lags, config_.gate, values);
    add_values(b.bg, values);
    ++b.count;
}

CorrelationAccumulator CorrelationAccumulator::merge(const CorrelationAccumulator &a,
                                                     const CorrelationAccumulator &b) {
    if (!a.config_.same_geometry(b.config_)) {
        throw GeometryError("correlator: cannot merge accumulators with different configurations");
    }
    CorrelationAccumulator out(a.config_);
    out.batches_ = a.batches_;
    for (const auto &[index, sums] : b.batches_) {
        auto it = out.batches_.find(index);
        if (it == out.batches_.end()) {
            out.batches_.emplace(index, sums);
            continue;
        }
        BatchSums merged;
        merged.count = it->second.count + sums.count;
        merged.sig = combine(it->second.sig, sums.sig);
        merged.bg = combine(it->second.bg, sums.bg);
        it->second = std::move(merged);
    }
    return out;
}

uint64_t CorrelationAccumulator::n_shots() const {
    uint64_t n = 0;
    for (const auto &[index, sums] : batches_) {
        n += sums.count;
    }
    return n;
}

std::vector<std::complex<double>> CorrelationAccumulator::g1_sig() const {
    PairMoments m(config_.grid.size());
    for (const auto &[index, sums] : batches_) {
        m.add(sums.sig, 1.0);
    }
    return m.g1;
}

std::vector<std::complex<double>> CorrelationAccumulator::g1_bg() const {
    PairMoments m(config_.grid.size());
    for (const auto &[index, sums] : batches_) {
        m.add(sums.bg, 1.0);
    }
    return m.g1;
}

std::vector<double> CorrelationAccumulator::g2_sig() const {
    PairMoments m(config_.grid.size());
    for (const auto &[index, sums] : batches_) {
        m.add(sums.sig, 1.0);
    }
    return m.g2;
}

std::vector<double> CorrelationAccumulator::g2_bg() const {
    PairMoments m(config_.grid.size());
    for (const auto &[index, sums] : batches_) {
        m.add(sums.bg, 1.0);
    }
    return m.g2;
}

CorrelationResult finalize(const CorrelationAccumulator &acc, bool require_error_bars) {
    const CorrelatorConfig &cfg = acc.config();
    const size_t n_lags = cfg.grid.size();
    std::vector<const BatchSums *> filled;
    for (const auto &[index, sums] : acc.batches()) {
        if (sums.count > 0) {
            filled.push_back(&sums);
        }
    }
    if (acc.n_shots() == 0) {
        throw InsufficientDataError("finalize: no shots accumulated");
    }
    if (require_error_bars && filled.size() < 2) {
        throw InsufficientDataError("finalize: error bars need at least two non-empty batches");
    }

    Moments total(n_lags);
    for (const BatchSums *b : filled) {
        total.add(*b, 1.0);
    }
    Estimate est = estimate(total, cfg);

    CorrelationResult r;
    r.lags = cfg.grid.lags;
    r.dt = cfg.dt;
    r.slot_samples = cfg.grid.slot_samples;
    r.window = cfg.grid.window;
    r.n_pulses = cfg.grid.n_pulses;
    r.n_shots = acc.n_shots();
    r.n_batches = static_cast<int>(filled.size());
    r.g1 = est.g1;
    r.g2 = est.g2;

    if (filled.size() >= 2) {
        for (const BatchSums *b : filled) {
            Moments loo = total;
            loo.add(*b, -1.0);
            Estimate e = estimate(loo, cfg);
            r.jackknife_g1.push_back(std::move(e.g1));
            r.jackknife_g2.push_back(std::move(e.g2));
        }
    }
    r.stderr_g1_re.resize(n_lags);
    r.stderr_g1_im.resize(n_lags);
    r.stderr_g2.resize(n_lags);
    std::vector<double> re(r.jackknife_g1.size()), im(re.size()), g2(re.size());
    for (size_t l = 0; l < n_lags; ++l) {
        for (size_t b = 0; b < re.size(); ++b) {
            re[b] = r.jackknife_g1[b][l].real();
            im[b] = r.jackknife_g1[b][l].imag();
            g2[b] = r.jackknife_g2[b][l];
        }
        r.stderr_g1_re[l] = jackknife_stderr(re);
        r.stderr_g1_im[l] = jackknife_stderr(im);
        r.stderr_g2[l] = jackknife_stderr(g2);
    }

    const auto zero = static_cast<size_t>(cfg.grid.index_of(0));
    r.g1_center = r.g1[zero];
    r.g2_center = r.g2[zero];
    for (int n = -(r.n_pulses - 1); n <= r.n_pulses - 1; ++n) {
        if (n == 0) {
            continue;
        }
        auto idx = static_cast<size_t>(cfg.grid.index_of(n * r.slot_samples));
        r.side_points.push_back({n, r.g1[idx], r.g2[idx]});
    }
    return r;
}

const PeakEntry &PeakTable::at(int n) const {
    for (const PeakEntry &p : peaks) {
        if (p.n == n) {
            return p;
        }
    }
    throw WindowError("peak table has no entry for n = " + std::to_string(n));
}

PeakTable peak_extract(const CorrelationResult &result, const PulseTrainSpec &spec) {
    double slot = spec.pulse_period / result.dt;
    if (std::fabs(slot - result.slot_samples) > 1e-6 * slot || spec.n_pulses != result.n_pulses) {
        std::ostringstream ss;
        ss << "peak_extract: lag grid (" << result.n_pulses << " pulses, " << result.slot_samples
           << " samples apart) does not match the train (" << spec.n_pulses << " pulses, " << slot << " samples apart)";
        throw ConfigError(ss.str());
    }
    LagGrid grid;
    grid.lags = result.lags;
    grid.slot_samples = result.slot_samples;
    grid.window = result.window;
    grid.n_pulses = result.n_pulses;

    const size_t n_jack = result.jackknife_g2.size();
    auto window_sum = [&](const std::vector<size_t> &idx, const std::vector<cplx> &g1, const std::vector<double> &g2,
                          double pairs) {
        cplx s1{};
        double s2 = 0.0;
        for (size_t i : idx) {
            s1 += g1[i];
            s2 += g2[i];
        }
        return std::pair{s1 / pairs, s2 / pairs};
    };

    PeakTable table;
    // Per jackknife replicate: centre, side mean of G2 and side mean of Re G1.
    std::vector<double> jack_center(n_jack), jack_side(n_jack, 0.0), jack_g1_side(n_jack, 0.0);
    int n_side = 0;
    for (int n = -(result.n_pulses - 1); n <= result.n_pulses - 1; ++n) {
        auto idx = grid.peak_indices(n);
        const double pairs = result.n_pulses - std::abs(n);
        PeakEntry e;
        e.n = n;
        std::tie(e.g1, e.g2) = window_sum(idx, result.g1, result.g2, pairs);
        std::vector<double> re(n_jack), im(n_jack), g2(n_jack);
        for (size_t b = 0; b < n_jack; ++b) {
            auto [j1, j2] = window_sum(idx, result.jackknife_g1[b], result.jackknife_g2[b], pairs);
            re[b] = j1.real();
            im[b] = j1.imag();
            g2[b] = j2;
            if (n == 0) {
                jack_center[b] = j2;
            } else {
                jack_side[b] += j2;
                jack_g1_side[b] += j1.real();
            }
        }
        e.g1_re_stderr = jackknife_stderr(re);
        e.g1_im_stderr = jackknife_stderr(im);
        e.g2_stderr = jackknife_stderr(g2);
        if (n != 0) {
            table.g2_side_mean += e.g2;
            table.g1_side_mean += e.g1.real();
            ++n_side;
        }
        table.peaks.push_back(e);
    }
    if (n_side == 0) {
        table.g2_side_mean = table.g1_side_mean = std::nan("");
        table.g2_side_stderr = table.g1_side_stderr = std::nan("");
        table.g2_ratio = table.g2_ratio_stderr = std::nan("");
        return table;
    }
    table.g2_side_mean /= n_side;
    table.g1_side_mean /= n_side;
    table.g2_ratio = table.at(0).g2 / table.g2_side_mean;
    std::vector<double> ratio(n_jack);
    for (size_t b = 0; b < n_jack; ++b) {
        jack_side[b] /= n_side;
        jack_g1_side[b] /= n_side;
        ratio[b] = jack_center[b] / jack_side[b];
    }
    table.g2_side_stderr = jackknife_stderr(jack_side);
    table.g1_side_stderr = jackknife_stderr(jack_g1_side);
    table.g2_ratio_stderr = jackknife_stderr(ratio);
    return table;
}

RabiAccumulator::RabiAccumulator(int slot_samples, int n_pulses, int n_batches, uint64_t shots_per_batch,
                                 double gain)
    : slot_samples_(slot_samples),
      n_pulses_(n_pulses),
      n_batches_(n_batches),
      shots_per_batch_(shots_per_batch),
      gain_(gain) {
    if (slot_samples < 1 || n_pulses < 1 || n_batches < 1 || !(gain > 0)) {
        throw ConfigError("rabi accumulator: slot, pulse count, batch count and gain must be positive");
    }
}

RabiAccumulator::Batch &RabiAccumulator::batch(uint32_t index) {
    auto it = batches_.find(index);
    if (it == batches_.end()) {
        it = batches_.emplace(index, Batch{}).first;
        const auto n = static_cast<size_t>(slot_samples_);
        for (auto *v : {&it->second.quad_re, &it->second.quad_im, &it->second.power_sig, &it->second.power_bg}) {
            v->assign(n, CompensatedSum{});
        }
    }
    return it->second;
}

void RabiAccumulator::accumulate_shot(const ShotRecord &demodulated) {
    accumulate_shot(demodulated, batch_of(demodulated.shot_index, shots_per_batch_, n_batches_));
}

void RabiAccumulator::accumulate_shot(const ShotRecord &shot, uint32_t batch_index) {
    shot.check_consistent();
    const auto slot = static_cast<size_t>(slot_samples_);
    if (static_cast<size_t>(n_pulses_) * slot > shot.sig_a.size()) {
        throw GeometryError("rabi accumulator: pulse slots exceed the trace");
    }
    if (dt_ == 0.0) {
        dt_ = shot.sig_a.dt;
    } else if (shot.sig_a.dt != dt_) {
        throw GeometryError("rabi accumulator: dt differs between shots");
    }
    if (batch_index >= static_cast<uint32_t>(n_batches_)) {
        throw ConfigError("rabi accumulator: batch index out of range");
    }
    Batch &b = batch(batch_index);
    for (size_t j = 0; j < slot; ++j) {
        cplx q{};
        double ps = 0.0;
        double pb = 0.0;
        for (size_t p = 0; p < static_cast<size_t>(n_pulses_); ++p) {
            size_t k = p * slot + j;
            cplx a = shot.sig_a.samples[k];
            q += a;
            ps += (std::conj(shot.sig_b.samples[k]) * a).real();
            pb += (std::conj(shot.noise_b.samples[k]) * shot.noise_a.samples[k]).real();
        }
        b.quad_re[j].add(q.real());
        b.quad_im[j].add(q.imag());
        b.power_sig[j].add(ps);
        b.power_bg[j].add(pb);
    }
    ++b.count;
}

RabiAccumulator RabiAccumulator::merge(const RabiAccumulator &a, const RabiAccumulator &b) {
    if (a.slot_samples_ != b.slot_samples_ || a.n_pulses_ != b.n_pulses_ || a.n_batches_ != b.n_batches_ ||
        a.shots_per_batch_ != b.shots_per_batch_ || a.gain_ != b.gain_ ||
        (a.dt_ != 0.0 && b.dt_ != 0.0 && a.dt_ != b.dt_)) {
        throw GeometryError("rabi accumulator: cannot merge different configurations");
    }
    RabiAccumulator out = a;
    out.dt_ = a.dt_ != 0.0 ? a.dt_ : b.dt_;
    for (const auto &[index, sums] : b.batches_) {
        auto it = out.batches_.find(index);
        if (it == out.batches_.end()) {
            out.batches_.emplace(index, sums);
            continue;
        }
        Batch merged;
        merged.count = it->second.count + sums.count;
        combine_into(merged.quad_re, it->second.quad_re, sums.quad_re);
        combine_into(merged.quad_im, it->second.quad_im, sums.quad_im);
        combine_into(merged.power_sig, it->second.power_sig, sums.power_sig);
        combine_into(merged.power_bg, it->second.power_bg, sums.power_bg);
        it->second = std::move(merged);
    }
    return out;
}

uint64_t RabiAccumulator::n_shots() const {
    uint64_t n = 0;
    for (const auto &[index, b] : batches_) {
        n += b.count;
    }
    return n;
}

RabiTrace RabiAccumulator::finalize() const {
    const uint64_t n_total = n_shots();
    if (n_total == 0) {
        throw InsufficientDataError("rabi: no shots accumulated");
    }
    const auto slot = static_cast<size_t>(slot_samples_);
    struct Totals {
        double count = 0;
        std::vector<cplx> quad;
        std::vector<double> power;
    };
    auto empty = [&] { return Totals{0.0, std::vector<cplx>(slot), std::vector<double>(slot)}; };
    auto add = [&](Totals &t, const Batch &b, double sign) {
        t.count += sign * static_cast<double>(b.count);
        for (size_t j = 0; j < slot; ++j) {
            t.quad[j] += sign * cplx(b.quad_re[j].value(), b.quad_im[j].value());
            t.power[j] += sign * (b.power_sig[j].value() - b.power_bg[j].value());
        }
    };
    auto means = [&](const Totals &t) {
        Totals m = t;
        double samples = t.count * n_pulses_;
        for (size_t j = 0; j < slot; ++j) {
            m.quad[j] /= samples * std::sqrt(gain_);
            m.power[j] /= samples * gain_;
        }
        return m;
    };

    Totals total = empty();
    for (const auto &[index, b] : batches_) {
        add(total, b, 1.0);
    }
    Totals mean = means(total);

    RabiTrace r;
    r.dt = dt_;
    r.n_shots = n_total;
    size_t qpeak = 0;
    size_t ppeak = 0;
    for (size_t j = 0; j < slot; ++j) {
        if (std::abs(mean.quad[j]) > std::abs(mean.quad[qpeak])) {
            qpeak = j;
        }
        if (std::fabs(mean.power[j]) > std::fabs(mean.power[ppeak])) {
            ppeak = j;
        }
    }
    // Global phase restricted to (-pi/2, pi/2] so the sign of the quadrature survives.
    double phi = std::arg(mean.quad[qpeak]);
    if (phi > std::numbers::pi / 2) {
        phi -= std::numbers::pi;
    } else if (phi <= -std::numbers::pi / 2) {
        phi += std::numbers::pi;
    }
    const cplx rot = std::polar(1.0, -phi);
    r.phase_rotation = phi;
    r.quadrature.resize(slot);
    for (size_t j = 0; j < slot; ++j) {
        r.quadrature[j] = mean.quad[j] * rot;
    }
    r.cross_power = mean.power;
    r.quad_peak_index = qpeak;
    r.quad_peak = r.quadrature[qpeak].real();
    r.power_peak_index = ppeak;
    r.power_peak = r.cross_power[ppeak];

    std::vector<std::vector<double>> jq(slot), jp(slot);
    size_t n_filled = 0;
    for (const auto &[index, b] : batches_) {
        if (b.count == 0) {
            continue;
        }
        ++n_filled;
    }
    if (n_filled >= 2) {
        for (const auto &[index, b] : batches_) {
            if (b.count == 0) {
                continue;
            }
            Totals loo = total;
            add(loo, b, -1.0);
            Totals m = means(loo);
            for (size_t j = 0; j < slot; ++j) {
                jq[j].push_back((m.quad[j] * rot).real());
                jp[j].push_back(m.power[j]);
            }
        }
    }
    r.quadrature_stderr.resize(slot);
    r.cross_power_stderr.resize(slot);
    for (size_t j = 0; j < slot; ++j) {
        r.quadrature_stderr[j] = jackknife_stderr(jq[j]);
        r.cross_power_stderr[j] = jackknife_stderr(jp[j]);
    }
    r.quad_peak_stderr = r.quadrature_stderr[qpeak];
    r.power_peak_stderr = r.cross_power_stderr[ppeak];
    return r;
}

RabiTrace rabi_traces(std::span<const ShotRecord> shots, const TemporalMode &mode, const PulseTrainSpec &spec,
                      const ChainParams &chain, int n_batches) {
    if (shots.empty()) {
        throw InsufficientDataError("rabi_traces: no shots");
    }
    double slot = spec.pulse_period * chain.sample_rate;
    if (std::fabs(slot - std::round(slot)) > 1e-6 * slot) {
        throw ConfigError("rabi_traces: pulse_period is not a whole number of samples");
    }
    const uint64_t per_batch = (shots.size() + static_cast<size_t>(n_batches) - 1) / static_cast<size_t>(n_batches);
    RabiAccumulator acc(static_cast<int>(std::llround(slot)), spec.n_pulses, n_batches, per_batch, chain.gain());
    for (size_t i = 0; i < shots.size(); ++i) {
        acc.accumulate_shot(demodulate_shot(shots[i], mode, chain), static_cast<uint32_t>(i / per_batch));
    }
    return acc.finalize();
}

}  // namespace photonstat
