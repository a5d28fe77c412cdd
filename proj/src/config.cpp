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


#include "photonstat/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "photonstat/errors.hpp"
#include "photonstat/manifest.hpp"

namespace photonstat {

using nlohmann::json;

namespace {

size_t line_of_offset(const std::string &text, size_t offset) {
    size_t line = 1;
    for (size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
        }
    }
    return line;
}

// Line of the first occurrence of "key", 0 when absent.
size_t line_of_key(const std::string &text, const std::string &key) {
    size_t pos = text.find("\"" + key + "\"");
    return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

std::string join(const std::string &prefix, const std::string &key) {
    return prefix.empty() ? key : prefix + "." + key;
}

// Reads fields out of a JSON document, rejecting unknown keys and wrong types.
class Reader {
   public:
    Reader(const json &root, const std::string &text) : text_(text) {
        stack_.push_back({&root, ""});
    }

    template <typename F>
    void section(const char *key, F &&body) {
        const json *obj = find(key);
        if (!obj) {
            return;
        }
        std::string path = join(top().path, key);
        if (!obj->is_object()) {
            fail(path, key, "must be an object");
        }
        stack_.push_back({obj, path});
        body();
        finish();
        stack_.pop_back();
    }

    void operator()(const char *key, double &dst) {
        if (const json *v = find(key)) {
            if (!v->is_number()) {
                fail(join(top().path, key), key, "must be a number");
            }
            dst = v->get<double>();
        }
    }
    void operator()(const char *key, int &dst) {
        if (const json *v = find(key)) {
            if (!v->is_number_integer()) {
                fail(join(top().path, key), key, "must be an integer");
            }
            dst = v->get<int>();
        }
    }
    void operator()(const char *key, uint64_t &dst) {
        if (const json *v = find(key)) {
            if (!v->is_number_unsigned()) {
                fail(join(top().path, key), key, "must be a non-negative integer");
            }
            dst = v->get<uint64_t>();
        }
    }
    void operator()(const char *key, bool &dst) {
        if (const json *v = find(key)) {
            if (!v->is_boolean()) {
                fail(join(top().path, key), key, "must be true or false");
            }
            dst = v->get<bool>();
        }
    }
    void operator()(const char *key, std::string &dst) {
        if (const json *v = find(key)) {
            if (!v->is_string()) {
                fail(join(top().path, key), key, "must be a string");
            }
            dst = v->get<std::string>();
        }
    }
    void operator()(const char *key, std::complex<double> &dst) {
        if (const json *v = find(key)) {
            if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
                fail(join(top().path, key), key, "must be [re, im]");
            }
            dst = {(*v)[0].get<double>(), (*v)[1].get<double>()};
        }
    }
    void operator()(const char *key, Range &dst) {
        section(key, [&] {
            (*this)("start", dst.start);
            (*this)("stop", dst.stop);
            (*this)("points", dst.points);
        });
    }
    void operator()(const char *key, StateKind &dst) {
        std::string s;
        (*this)(key, s);
        if (s.empty()) {
            return;
        }
        for (StateKind k : {StateKind::QubitSuperposition, StateKind::Coherent, StateKind::Vacuum}) {
            if (s == state_kind_name(k)) {
                dst = k;
                return;
            }
        }
        fail(join(top().path, key), key, "must be one of qubit, coherent, vacuum");
    }
    void operator()(const char *key, BackgroundMode &dst) {
        std::string s;
        (*this)(key, s);
        if (s.empty()) {
            return;
        }
        for (BackgroundMode m : {BackgroundMode::Full, BackgroundMode::PureNoise}) {
            if (s == background_mode_name(m)) {
                dst = m;
                return;
            }
        }
        fail(join(top().path, key), key, "must be full or pure_noise");
    }

    bool seen(const std::string &path) const {
        return seen_.count(path) > 0;
    }

    void finish() {
        const Frame &f = top();
        for (const auto &[key, value] : f.obj->items()) {
            if (!seen_.count(join(f.path, key))) {
                fail(join(f.path, key), key, "is not a known field");
            }
        }
    }

   private:
    struct Frame {
        const json *obj;
        std::string path;
    };

    const Frame &top() const {
        return stack_.back();
    }

    const json *find(const char *key) {
        const json &obj = *top().obj;
        auto it = obj.find(key);
        if (it == obj.end()) {
            return nullptr;
        }
        seen_.insert(join(top().path, key));
        return &*it;
    }

    [[noreturn]] void fail(const std::string &path, const std::string &key, const std::string &msg) const {
        size_t line = line_of_key(text_, key);
        std::ostringstream ss;
        ss << "config field '" << path << "' " << msg;
        if (line > 0) {
            ss << " (line " << line << ")";
        }
        throw ParseError(ss.str(), line, path);
    }

    const std::string &text_;
    std::vector<Frame> stack_;
    std::set<std::string> seen_;
};

// Writes the same fields as Reader into a JSON object.
class Writer {
   public:
    json root = json::object();

    template <typename F>
    void section(const char *key, F &&body) {
        json *parent = current_;
        json &child = (*parent)[key] = json::object();
        current_ = &child;
        body();
        current_ = parent;
    }
    template <typename T>
    void operator()(const char *key, const T &value) {
        (*current_)[key] = value;
    }
    void operator()(const char *key, const std::complex<double> &v) {
        (*current_)[key] = json::array({v.real(), v.imag()});
    }
    void operator()(const char *key, const Range &r) {
        (*current_)[key] = json{{"start", r.start}, {"stop", r.stop}, {"points", r.points}};
    }
    void operator()(const char *key, const StateKind &k) {
        (*current_)[key] = state_kind_name(k);
    }
    void operator()(const char *key, const BackgroundMode &m) {
        (*current_)[key] = background_mode_name(m);
    }

   private:
    json *current_ = &root;
};

// Single field list shared by parsing and echoing.
template <typename V, typename C>
void visit_config(V &v, C &c) {
    v.section("qubit", [&] {
        v("ej_max", c.qubit.ej_max);
        v("ec", c.qubit.ec);
        v("gamma1_e", c.qubit.gamma1_e);
        v("gamma1_c", c.qubit.gamma1_c);
        v("gamma1_n", c.qubit.gamma1_n);
        v("gamma_phi", c.qubit.gamma_phi);
        v("resonator_freq", c.qubit.resonator_freq);
        v("quoted_t1_ns", c.qubit.quoted_t1_ns);
    });
    v.section("chain", [&] {
        v("n_add_a", c.chain.n_add_a);
        v("n_add_b", c.chain.n_add_b);
        v("gain_db", c.chain.gain_db);
        v("if_freq", c.chain.if_freq);
        v("sample_rate", c.chain.sample_rate);
        v("trace_len", c.chain.trace_len);
        v("if_enabled", c.chain.if_enabled);
    });
    v.section("train", [&] {
        v("n_pulses", c.train.n_pulses);
        v("pulse_period", c.train.pulse_period);
        v("control_period", c.train.control_period);
        v("active_window", c.train.active_window);
        v("gauss_sigma", c.train.gauss_sigma);
    });
    v.section("state", [&] {
        v("kind", c.state.kind);
        v("theta_r", c.state.theta_r);
        v("fidelity", c.state.fidelity);
        v("alpha", c.state.alpha);
        v("theta_sweep", c.state.theta_sweep);
    });
    v.section("spectro", [&] {
        v("flux", c.spectro.flux);
        v("probe_ghz", c.spectro.probe_ghz);
        v("working_freq_ghz", c.spectro.working_freq_ghz);
        v("power_dbm", c.spectro.power_dbm);
        v("detuning_mhz", c.spectro.detuning_mhz);
        v("rabi_per_sqrt_mw", c.spectro.rabi_per_sqrt_mw);
    });
    v.section("correlator", [&] {
        v("window", c.correlator.window);
        v("gate_halfwidth", c.correlator.gate_halfwidth);
        v("background", c.correlator.background);
    });
    v("shots", c.shots);
    v("batches", c.batches);
    v("seed", c.seed);
    v("workers", c.workers);
    v.section("output", [&] {
        v("dir", c.output.dir);
        v("store_traces", c.output.store_traces);
    });
}

int derived_trace_len(const ExperimentConfig &c) {
    return static_cast<int>(std::llround(c.train.control_period * c.chain.sample_rate));
}

void check_range(const Range &r, const std::string &name, bool increasing) {
    if (r.points < 1) {
        throw ValidationError(name + ": points must be at least 1");
    }
    if (!std::isfinite(r.start) || !std::isfinite(r.stop)) {
        throw ValidationError(name + ": endpoints must be finite");
    }
    if (increasing && r.points > 1 && !(r.stop > r.start)) {
        throw ValidationError(name + ": grid must be increasing (stop > start)");
    }
}

}  // namespace

std::vector<double> Range::values() const {
    std::vector<double> v(static_cast<size_t>(std::max(points, 0)));
    for (int i = 0; i < points; ++i) {
        v[static_cast<size_t>(i)] = points == 1 ? start : start + (stop - start) * i / (points - 1);
    }
    return v;
}

PreparedState StateConfig::prepared(double theta) const {
    switch (kind) {
        case StateKind::QubitSuperposition:
            return prepare_state(theta, fidelity);
        case StateKind::Coherent:
            return coherent_state(alpha);
        case StateKind::Vacuum:
            return vacuum_state();
    }
    return vacuum_state();
}

const char *state_kind_name(StateKind kind) {
    switch (kind) {
        case StateKind::QubitSuperposition:
            return "qubit";
        case StateKind::Coherent:
            return "coherent";
        case StateKind::Vacuum:
            return "vacuum";
    }
    return "?";
}

const char *background_mode_name(BackgroundMode mode) {
    return mode == BackgroundMode::Full ? "full" : "pure_noise";
}

void ExperimentConfig::validate() {
    warnings = qubit.validate();
    train.validate();
    chain.validate(train);
    if (shots < 1) {
        throw ValidationError("shots must be at least 1");
    }
    if (batches < 2) {
        throw ValidationError("batches must be at least 2");
    }
    if (shots % static_cast<uint64_t>(batches) != 0) {
        std::ostringstream ss;
        ss << "shots (" << shots << ") must be divisible by batches (" << batches << ")";
        throw ValidationError(ss.str());
    }
    if (workers < 1) {
        throw ValidationError("workers must be at least 1");
    }
    if (!std::isfinite(state.theta_r)) {
        throw ValidationError("state.theta_r must be finite");
    }
    if (!(state.fidelity >= 0 && state.fidelity <= 1)) {
        throw ValidationError("state.fidelity must lie in [0, 1]");
    }
    check_range(state.theta_sweep, "state.theta_sweep", false);
    check_range(spectro.flux, "spectro.flux", true);
    check_range(spectro.probe_ghz, "spectro.probe_ghz", true);
    check_range(spectro.power_dbm, "spectro.power_dbm", true);
    check_range(spectro.detuning_mhz, "spectro.detuning_mhz", true);
    if (!(spectro.rabi_per_sqrt_mw > 0)) {
        throw ValidationError("spectro.rabi_per_sqrt_mw must be positive");
    }
    if (correlator.window < 0) {
        throw ValidationError("correlator.window must be non-negative");
    }
    double slot = train.pulse_period * chain.sample_rate;
    if (std::fabs(slot - std::round(slot)) > 1e-6 * slot) {
        throw ValidationError("train.pulse_period must be a whole number of samples");
    }
    if (2 * correlator.window >= std::llround(slot)) {
        throw ValidationError("correlator.window overlaps neighbouring peaks");
    }
    try {
        hbt_setup();
    } catch (const ValidationError &) {
        throw;
    } catch (const Error &e) {
        throw ValidationError(std::string("geometry: ") + e.what());
    }
}

nlohmann::json ExperimentConfig::to_json() const {
    Writer w;
    visit_config(w, *this);
    return w.root;
}

std::string ExperimentConfig::hash() const {
    json j = to_json();
    j["output"].erase("dir");
    j.erase("workers");
    return sha256_hex(j.dump());
}

HbtSetup ExperimentConfig::hbt_setup() const {
    HbtSetup s = HbtSetup::make(qubit, train, chain);
    s.window = correlator.window;
    s.gate_halfwidth = correlator.gate_halfwidth;
    s.background = correlator.background;
    s.n_batches = batches;
    return s;
}

ExperimentConfig default_config() {
    ExperimentConfig c;
    c.chain.trace_len = derived_trace_len(c);
    c.validate();
    return c;
}

ExperimentConfig parse_config(const std::string &text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error &e) {
        size_t line = line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError("config is not valid JSON (line " + std::to_string(line) + "): " + e.what(), line, "");
    }
    if (!root.is_object()) {
        throw ParseError("config must be a JSON object", 1, "");
    }
    ExperimentConfig c;
    Reader r(root, text);
    std::string preset;
    r("preset", preset);
    if (!preset.empty() && preset != "paper") {
        throw ParseError("unknown preset '" + preset + "'", line_of_key(text, "preset"), "preset");
    }
    visit_config(r, c);
    r.finish();
    if (!r.seen("chain.trace_len")) {
        c.chain.trace_len = derived_trace_len(c);
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open config file " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace photonstat
