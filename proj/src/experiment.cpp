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


#include "photonstat/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "photonstat/archive.hpp"
#include "photonstat/errors.hpp"
#include "photonstat/pipeline.hpp"
#include "photonstat/rng.hpp"

namespace photonstat {

using nlohmann::json;

namespace {

std::string path_in(const std::string &dir, const std::string &name) {
    return (std::filesystem::path(dir) / name).string();
}

class CsvWriter {
   public:
    explicit CsvWriter(const std::vector<std::string> &columns) {
        for (size_t i = 0; i < columns.size(); ++i) {
            ss_ << (i ? "," : "") << columns[i];
        }
        ss_ << "\n";
    }
    void row(std::initializer_list<double> values) {
        size_t i = 0;
        for (double v : values) {
            ss_ << (i++ ? "," : "") << format_number(v);
        }
        ss_ << "\n";
    }
    void save(const std::string &path) const {
        write_text_file(path, ss_.str());
    }

   private:
    std::ostringstream ss_;
};

void write_json(const std::string &path, const json &j) {
    write_text_file(path, j.dump(2) + "\n");
}

RunManifest start_manifest(const std::string &command, const ExperimentConfig &config) {
    RunManifest m;
    m.command = command;
    m.config_hash = config.hash();
    m.seed = config.seed;
    m.started_at = utc_timestamp();
    m.parameters = parameter_echo(config);
    m.warnings = config.warnings;
    return m;
}

void finish_manifest(RunManifest &m, const std::string &dir, const std::vector<std::string> &files) {
    for (const auto &f : files) {
        m.add_result(dir, f);
    }
    m.finished_at = utc_timestamp();
    m.write(path_in(dir, "manifest.json"));
}

// |r| at one (flux, probe) point, through the same code path as the map.
double magnitude_at(const QubitParams &qubit, double flux, double probe_ghz) {
    double f[1] = {flux};
    double p[1] = {probe_ghz};
    return flux_spectrum_map(qubit, f, p).magnitude[0];
}

// Golden-section minimum of |r| over [lo, hi].
double refine_dip(const QubitParams &qubit, double flux, double lo, double hi) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - g * (hi - lo);
    double d = lo + g * (hi - lo);
    double fc = magnitude_at(qubit, flux, c);
    double fd = magnitude_at(qubit, flux, d);
    while (hi - lo > 1e-9) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = magnitude_at(qubit, flux, c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = magnitude_at(qubit, flux, d);
        }
    }
    return (lo + hi) / 2.0;
}

json correlation_json(const CorrelationResult &r) {
    std::vector<double> g1_re, g1_im;
    for (auto v : r.g1) {
        g1_re.push_back(v.real());
        g1_im.push_back(v.imag());
    }
    json side = json::array();
    for (const auto &s : r.side_points) {
        side.push_back({{"n", s.n}, {"g1_re", s.g1.real()}, {"g1_im", s.g1.imag()}, {"g2", s.g2}});
    }
    return {
        {"n_shots", r.n_shots},
        {"n_batches", r.n_batches},
        {"dt", r.dt},
        {"slot_samples", r.slot_samples},
        {"window", r.window},
        {"n_pulses", r.n_pulses},
        {"lags", r.lags},
        {"g1_re", g1_re},
        {"g1_im", g1_im},
        {"g2", r.g2},
        {"stderr_g1_re", r.stderr_g1_re},
        {"stderr_g1_im", r.stderr_g1_im},
        {"stderr_g2", r.stderr_g2},
        {"g1_center", {r.g1_center.real(), r.g1_center.imag()}},
        {"g2_center", r.g2_center},
        {"side_points", side},
    };
}

json theory_json(const CorrelationTheory &t) {
    return {{"g1_center", t.g1_center},
            {"g1_side", t.g1_side},
            {"g2_center", t.g2_center},
            {"g2_side", t.g2_side},
            {"g2_ratio", t.g2_ratio()}};
}

json fit_or_error(const std::function<FitReport()> &fit, FitReport &out) {
    try {
        out = fit();
        return fit_report_json(out);
    } catch (const Error &e) {
        return {{"error", e.what()}, {"kind", error_kind_name(e.kind())}};
    }
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

const std::vector<double> &column(const std::map<std::string, std::vector<double>> &csv, const std::string &name,
                                  const std::string &path) {
    auto it = csv.find(name);
    if (it == csv.end()) {
        throw ParseError(path + ": missing column '" + name + "'", 1, name);
    }
    return it->second;
}

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

json parameter_echo(const ExperimentConfig &config) {
    json j = config.to_json();
    DecayRates rates = DecayRates::from_params(config.qubit);
    json derived = {
        {"gamma1_mhz", rates.gamma1},
        {"gamma2_mhz", rates.gamma2},
        {"eta", efficiency(rates)},
        {"sweet_spot_ghz", transition_frequency(config.qubit, FluxBias{0.0})},
        {"gain_linear", config.chain.gain()},
        {"dt_s", config.chain.dt()},
    };
    try {
        HbtSetup setup = config.hbt_setup();
        derived["slot_samples"] = setup.slot_samples();
        derived["mode_origin_s"] = setup.mode.origin;
        derived["mode_samples"] = setup.mode.size();
        derived["mode_decay_per_sample"] = setup.mode.decay_per_sample;
        derived["shots_per_batch"] = setup.shots_per_batch(config.shots);
    } catch (const Error &) {
    }
    j["derived"] = derived;
    return j;
}

json fit_report_json(const FitReport &report) {
    auto params = [](const std::vector<FitParam> &ps) {
        json o = json::object();
        for (const auto &p : ps) {
            o[p.name] = {{"value", p.value}, {"sigma", p.sigma}};
        }
        return o;
    };
    return {
        {"params", params(report.params)},   {"derived", params(report.derived)},
        {"residual_norm", report.residual_norm}, {"r_squared", report.r_squared},
        {"n_points", report.n_points},       {"converged", report.converged},
        {"iterations", report.iterations},
    };
}

SpectroOutput run_spectro(const ExperimentConfig &config) {
    const std::string &dir = config.output.dir;
    SpectroOutput out;
    out.manifest = start_manifest("spectro", config);
    const QubitParams &q = config.qubit;

    auto flux = config.spectro.flux.values();
    auto probe = config.spectro.probe_ghz.values();
    out.map = flux_spectrum_map(q, flux, probe);

    CsvWriter map_csv({"phi_ratio", "probe_ghz", "magnitude"});
    for (size_t i = 0; i < flux.size(); ++i) {
        for (size_t k = 0; k < probe.size(); ++k) {
            map_csv.row({flux[i], probe[k], out.map.at(i, k)});
        }
    }
    map_csv.save(path_in(dir, "flux_map.csv"));

    CsvWriter dip_csv({"phi_ratio", "transition_ghz", "dip_ghz", "dip_magnitude"});
    std::vector<FluxPoint> flux_points;
    size_t sweet = 0;
    for (size_t i = 0; i < flux.size(); ++i) {
        DipEntry d;
        d.flux = flux[i];
        d.transition_ghz = out.map.transition_ghz[i];
        size_t best = 0;
        for (size_t k = 1; k < probe.size(); ++k) {
            if (out.map.at(i, k) < out.map.at(i, best)) {
                best = k;
            }
        }
        // A minimum on the grid edge means the transition lies outside the probe window.
        if (out.map.masked[i] || best == 0 || best + 1 == probe.size()) {
            d.dip_ghz = std::nan("");
            d.dip_magnitude = std::nan("");
        } else {
            d.dip_ghz = refine_dip(q, flux[i], probe[best - 1], probe[best + 1]);
            d.dip_magnitude = magnitude_at(q, flux[i], d.dip_ghz);
            flux_points.push_back({d.flux, d.dip_ghz});
        }
        if (std::fabs(flux[i]) < std::fabs(flux[sweet])) {
            sweet = i;
        }
        dip_csv.row({d.flux, d.transition_ghz, d.dip_ghz, d.dip_magnitude});
        out.dips.push_back(d);
    }
    dip_csv.save(path_in(dir, "dips.csv"));
    out.sweet_spot_dip_ghz = out.dips[sweet].dip_ghz;
    out.working_flux = flux_for_frequency(q, config.spectro.working_freq_ghz).phi_ratio;

    DecayRates rates = DecayRates::from_params(q);
    CsvWriter sweep_csv({"power_dbm", "detuning_mhz", "re", "im", "magnitude"});
    std::vector<PowerSeries> series;
    for (double p : config.spectro.power_dbm.values()) {
        PowerSeries s;
        s.power_dbm = p;
        double omega = power_to_rabi(p, config.spectro.rabi_per_sqrt_mw);
        for (double d : config.spectro.detuning_mhz.values()) {
            std::complex<double> r = reflection_coefficient(rates, rates.gamma1_e, DrivePoint{d, omega});
            sweep_csv.row({p, d, r.real(), r.imag(), std::abs(r)});
            s.points.push_back({d, r});
        }
        series.push_back(std::move(s));
    }
    sweep_csv.save(path_in(dir, "reflection_sweep.csv"));

    json fits = {
        {"flux", fit_or_error([&] { return fit_flux_spectrum(flux_points); }, out.flux_fit)},
        {"power_sweep", fit_or_error([&] { return fit_reflection_power_sweep(series); }, out.power_fit)},
    };
    write_json(path_in(dir, "spectro_fit.json"), fits);

    json summary = {
        {"sweet_spot_dip_ghz", out.sweet_spot_dip_ghz},
        {"sweet_spot_model_ghz", transition_frequency(q, FluxBias{0.0})},
        {"working_freq_ghz", config.spectro.working_freq_ghz},
        {"working_flux", out.working_flux},
        {"eta", efficiency(rates)},
    };
    write_json(path_in(dir, "summary.json"), summary);
    finish_manifest(out.manifest, dir,
                    {"flux_map.csv", "dips.csv", "reflection_sweep.csv", "spectro_fit.json", "summary.json"});
    return out;
}

HbtOutput run_hbt(const ExperimentConfig &config) {
    const std::string &dir = config.output.dir;
    HbtOutput out;
    out.manifest = start_manifest("hbt", config);
    HbtSetup setup = config.hbt_setup();
    PreparedState state = config.state.prepared();
    std::filesystem::create_directories(dir);

    std::unique_ptr<ArchiveWriter> archive;
    ShotSink sink;
    if (config.output.store_traces) {
        archive = std::make_unique<ArchiveWriter>(
            path_in(dir, "traces.phst"), make_archive_header(config.chain, config.train.n_pulses, config.shots));
        sink = [&archive](const ShotRecord &shot) { archive->write(shot); };
    }
    HbtAccumulators acc = simulate_hbt(setup, state, config.shots, config.seed, resolve_workers(config.workers), sink);
    if (archive) {
        archive->close();
    }
    out.correlation = finalize(acc.correlation);
    out.peaks = peak_extract(out.correlation, config.train);
    out.rabi = acc.rabi.finalize();
    out.theory = g2_theory(state);

    write_json(path_in(dir, "correlation.json"), correlation_json(out.correlation));

    CsvWriter peaks({"n", "g1_re", "g1_im", "g1_re_stderr", "g1_im_stderr", "g2", "g2_stderr"});
    for (const auto &p : out.peaks.peaks) {
        peaks.row({static_cast<double>(p.n), p.g1.real(), p.g1.imag(), p.g1_re_stderr, p.g1_im_stderr, p.g2,
                   p.g2_stderr});
    }
    peaks.save(path_in(dir, "peaks.csv"));

    CsvWriter rabi({"t_ns", "quad_re", "quad_im", "quad_stderr", "power", "power_stderr"});
    for (size_t j = 0; j < out.rabi.quadrature.size(); ++j) {
        rabi.row({static_cast<double>(j) * out.rabi.dt * 1e9, out.rabi.quadrature[j].real(),
                  out.rabi.quadrature[j].imag(), out.rabi.quadrature_stderr[j], out.rabi.cross_power[j],
                  out.rabi.cross_power_stderr[j]});
    }
    rabi.save(path_in(dir, "rabi_trace.csv"));

    json summary = {
        {"state", state_kind_name(state.kind)},
        {"shots", config.shots},
        {"g2_ratio", out.peaks.g2_ratio},
        {"g2_ratio_stderr", out.peaks.g2_ratio_stderr},
        {"g1_center", out.peaks.at(0).g1.real()},
        {"g1_side_mean", out.peaks.g1_side_mean},
        {"g2_center", out.peaks.at(0).g2},
        {"g2_side_mean", out.peaks.g2_side_mean},
        {"quad_peak", out.rabi.quad_peak},
        {"power_peak", out.rabi.power_peak},
        {"theory_mode_units", theory_json(out.theory)},
    };
    write_json(path_in(dir, "summary.json"), summary);

    std::vector<std::string> files = {"correlation.json", "peaks.csv", "rabi_trace.csv", "summary.json"};
    if (archive) {
        files.push_back("traces.phst");
    }
    finish_manifest(out.manifest, dir, files);
    return out;
}

RabiSweepOutput run_rabi(const ExperimentConfig &config) {
    const std::string &dir = config.output.dir;
    RabiSweepOutput out;
    out.manifest = start_manifest("rabi", config);
    HbtSetup setup = config.hbt_setup();
    const size_t idx = pulse_start_sample(setup.mode, config.train.pulse_period, 0);
    const int workers = resolve_workers(config.workers);

    auto thetas = config.state.theta_sweep.values();
    CsvWriter csv({"theta_r", "quad_peak", "quad_peak_stderr", "power_peak", "power_peak_stderr", "g1_center",
                   "g1_center_stderr", "g1_side", "g1_side_stderr", "g2_ratio", "g2_ratio_stderr"});
    for (size_t i = 0; i < thetas.size(); ++i) {
        PreparedState state = config.state.prepared(thetas[i]);
        HbtAccumulators acc = simulate_hbt(setup, state, config.shots, derive_seed(config.seed, i), workers);
        RabiTrace trace = acc.rabi.finalize();
        CorrelationResult corr = finalize(acc.correlation);
        PeakTable peaks = peak_extract(corr, config.train);
        RabiSweepRow row;
        row.theta_r = thetas[i];
        row.quad_peak = trace.quadrature[idx].real();
        row.quad_peak_stderr = trace.quadrature_stderr[idx];
        row.power_peak = trace.cross_power[idx];
        row.power_peak_stderr = trace.cross_power_stderr[idx];
        row.g1_center = peaks.at(0).g1.real();
        row.g1_center_stderr = peaks.at(0).g1_re_stderr;
        row.g1_side = peaks.g1_side_mean;
        row.g1_side_stderr = peaks.g1_side_stderr;
        row.g2_ratio = peaks.g2_ratio;
        row.g2_ratio_stderr = peaks.g2_ratio_stderr;
        csv.row({row.theta_r, row.quad_peak, row.quad_peak_stderr, row.power_peak, row.power_peak_stderr,
                 row.g1_center, row.g1_center_stderr, row.g1_side, row.g1_side_stderr, row.g2_ratio,
                 row.g2_ratio_stderr});
        out.rows.push_back(row);
    }
    csv.save(path_in(dir, "rabi.csv"));

    std::vector<RabiPoint> quad, power;
    for (const auto &r : out.rows) {
        quad.push_back({r.theta_r, r.quad_peak});
        power.push_back({r.theta_r, r.power_peak});
    }
    json fits = {
        {"quadrature", fit_or_error([&] { return fit_rabi(quad, RabiModel::Quadrature); }, out.quad_fit)},
        {"power", fit_or_error([&] { return fit_rabi(power, RabiModel::Power); }, out.power_fit)},
    };
    write_json(path_in(dir, "rabi_fit.json"), fits);

    auto argmax = [&](auto field) {
        size_t best = 0;
        for (size_t i = 1; i < out.rows.size(); ++i) {
            if (field(out.rows[i]) > field(out.rows[best])) {
                best = i;
            }
        }
        return out.rows.empty() ? std::nan("") : out.rows[best].theta_r;
    };
    json summary = {
        {"points", out.rows.size()},
        {"shots_per_point", config.shots},
        {"quad_argmax_theta", argmax([](const RabiSweepRow &r) { return r.quad_peak; })},
        {"power_argmax_theta", argmax([](const RabiSweepRow &r) { return r.power_peak; })},
        {"quad_fit_r_squared", out.quad_fit.r_squared},
        {"power_fit_r_squared", out.power_fit.r_squared},
    };
    write_json(path_in(dir, "summary.json"), summary);
    finish_manifest(out.manifest, dir, {"rabi.csv", "rabi_fit.json", "summary.json"});
    return out;
}

json BenchReport::to_json() const {
    json rs = json::array();
    for (const auto &r : runs) {
        rs.push_back({{"workers", r.workers},
                      {"shots_per_second", r.shots_per_second},
                      {"median", r.median},
                      {"spread", r.spread}});
    }
    return {{"shots", shots}, {"runs", rs}, {"scaling", scaling}};
}

BenchReport bench_throughput(const ExperimentConfig &config, const std::vector<int> &worker_counts, int repeats) {
    if (config.shots == 0) {
        throw ValidationError("bench: shots must be positive");
    }
    if (worker_counts.empty() || repeats < 1) {
        throw ValidationError("bench: need at least one worker count and one repeat");
    }
    HbtSetup setup = config.hbt_setup();
    PreparedState state = config.state.prepared();
    BenchReport report;
    report.shots = config.shots;
    for (int w : worker_counts) {
        if (w < 1) {
            throw ValidationError("bench: worker counts must be positive");
        }
        BenchRun run;
        run.workers = w;
        for (int r = 0; r < repeats; ++r) {
            auto t0 = std::chrono::steady_clock::now();
            simulate_hbt(setup, state, config.shots, config.seed, w);
            std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - t0;
            run.shots_per_second.push_back(static_cast<double>(config.shots) / elapsed.count());
        }
        run.median = median(run.shots_per_second);
        auto [lo, hi] = std::minmax_element(run.shots_per_second.begin(), run.shots_per_second.end());
        run.spread = (*hi - *lo) / run.median;
        report.runs.push_back(run);
    }
    report.scaling = report.runs.back().median / report.runs.front().median;
    return report;
}

std::map<std::string, std::vector<double>> read_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(path + ": empty file", 1, "");
    }
    std::vector<std::string> names;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            names.push_back(cell);
        }
    }
    std::map<std::string, std::vector<double>> cols;
    for (const auto &n : names) {
        cols[n];
    }
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        size_t i = 0;
        while (std::getline(ss, cell, ',')) {
            if (i >= names.size()) {
                break;
            }
            char *end = nullptr;
            double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0') {
                throw ParseError(path + ": bad number '" + cell + "' on line " + std::to_string(line_no), line_no,
                                 names[i]);
            }
            cols[names[i++]].push_back(v);
        }
        if (i != names.size()) {
            throw ParseError(path + ": wrong column count on line " + std::to_string(line_no), line_no, "");
        }
    }
    return cols;
}

FitReport fit_csv(const std::string &path, FitKind kind) {
    auto csv = read_csv(path);
    switch (kind) {
        case FitKind::Reflection: {
            const auto &d = column(csv, "detuning_mhz", path);
            const auto &re = column(csv, "re", path);
            const auto &im = column(csv, "im", path);
            auto pw = csv.find("power_dbm");
            std::vector<PowerSeries> series;
            for (size_t i = 0; i < d.size(); ++i) {
                double p = pw == csv.end() ? 0.0 : pw->second[i];
                if (series.empty() || series.back().power_dbm != p) {
                    series.push_back({p, {}});
                }
                series.back().points.push_back({d[i], {re[i], im[i]}});
            }
            if (series.size() > 1) {
                return fit_reflection_power_sweep(series);
            }
            return fit_reflection(series.empty() ? std::vector<ReflectionPoint>{} : series[0].points);
        }
        case FitKind::Flux: {
            const auto &phi = column(csv, "phi_ratio", path);
            const auto &f = csv.count("frequency_ghz") ? csv.at("frequency_ghz") : column(csv, "dip_ghz", path);
            std::vector<FluxPoint> pts;
            for (size_t i = 0; i < phi.size(); ++i) {
                if (std::isfinite(f[i])) {
                    pts.push_back({phi[i], f[i]});
                }
            }
            return fit_flux_spectrum(pts);
        }
        case FitKind::RabiQuadrature:
        case FitKind::RabiPower: {
            bool quad = kind == FitKind::RabiQuadrature;
            const auto &theta = column(csv, "theta_r", path);
            const auto &v = column(csv, quad ? "quad_peak" : "power_peak", path);
            std::vector<RabiPoint> pts;
            for (size_t i = 0; i < theta.size(); ++i) {
                pts.push_back({theta[i], v[i]});
            }
            return fit_rabi(pts, quad ? RabiModel::Quadrature : RabiModel::Power);
        }
    }
    throw ValidationError("fit: unknown kind");
}

std::string report_directory(const std::string &dir) {
    std::string mpath = path_in(dir, "manifest.json");
    std::ifstream in(mpath);
    if (!in) {
        throw IoError("no manifest.json in " + dir);
    }
    json m;
    try {
        m = json::parse(in);
    } catch (const json::parse_error &e) {
        throw ParseError(mpath + ": " + e.what(), 0, "");
    }
    std::ostringstream ss;
    ss << "command      " << m.value("command", "?") << "\n";
    ss << "version      " << m.value("version", "?") << "\n";
    ss << "config hash  " << m.value("config_hash", "?") << "\n";
    ss << "seed         " << m.value("seed", uint64_t{0}) << "\n";
    ss << "started      " << m.value("started_at", "?") << "\n";
    ss << "finished     " << m.value("finished_at", "?") << "\n";
    const json warnings = m.value("warnings", json::array());
    const json digests = m.value("result_digests", json::object());
    for (const auto &w : warnings) {
        ss << "warning      " << w.get<std::string>() << "\n";
    }
    ss << "results\n";
    for (const auto &[name, digest] : digests.items()) {
        std::string status;
        try {
            status = sha256_file(path_in(dir, name)) == digest.get<std::string>() ? "ok" : "MODIFIED";
        } catch (const IoError &) {
            status = "MISSING";
        }
        ss << "  " << name << "  " << status << "\n";
    }
    std::ifstream sin(path_in(dir, "summary.json"));
    if (sin) {
        json s = json::parse(sin, nullptr, false);
        if (!s.is_discarded()) {
            ss << "summary\n";
            for (const auto &[k, v] : s.items()) {
                ss << "  " << k << " = " << v.dump() << "\n";
            }
        }
    }
    return ss.str();
}

}  // namespace photonstat
