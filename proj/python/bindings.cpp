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


#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <complex>
#include <vector>

#include "photonstat/archive.hpp"
#include "photonstat/config.hpp"
#include "photonstat/correlator.hpp"
#include "photonstat/emission.hpp"
#include "photonstat/errors.hpp"
#include "photonstat/experiment.hpp"
#include "photonstat/fitting.hpp"
#include "photonstat/qubit_model.hpp"
#include "photonstat/rng.hpp"

namespace py = pybind11;
using namespace photonstat;

namespace {

using cplx = std::complex<double>;
using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;
using DArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

template <typename T>
std::vector<T> to_vector(const py::array_t<T, py::array::c_style | py::array::forcecast> &a) {
    return std::vector<T>(a.data(), a.data() + a.size());
}

template <typename T>
py::array_t<T> to_array(const std::vector<T> &v) {
    py::array_t<T> a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

std::string fit_json(const FitReport &r) {
    return fit_report_json(r).dump();
}

ExperimentConfig config_from(const std::string &json_text) {
    return json_text.empty() ? default_config() : parse_config(json_text);
}

py::array_t<std::complex<float>> traces_array(const std::vector<ShotRecord> &shots, uint32_t trace_len) {
    py::array_t<std::complex<float>> a({static_cast<py::ssize_t>(shots.size()), py::ssize_t{4},
                                        static_cast<py::ssize_t>(trace_len)});
    auto m = a.mutable_unchecked<3>();
    for (size_t s = 0; s < shots.size(); ++s) {
        const IQTrace *t[4] = {&shots[s].sig_a, &shots[s].sig_b, &shots[s].noise_a, &shots[s].noise_b};
        for (int c = 0; c < 4; ++c) {
            for (uint32_t k = 0; k < trace_len; ++k) {
                auto v = t[c]->samples[k];
                m(static_cast<py::ssize_t>(s), c, k) = {static_cast<float>(v.real()), static_cast<float>(v.imag())};
            }
        }
    }
    return a;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "photonstat native core: qubit model, heterodyne sampling, correlator and fitting.";
    m.attr("__version__") = kVersion;

    // Translators run newest first, so the base class is registered before the specific kinds.
    auto &base = py::register_exception<Error>(m, "PhotonstatError", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<GeometryError>(m, "GeometryError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<RegimeError>(m, "RegimeError", base.ptr());
    py::register_exception<InsufficientDataError>(m, "InsufficientDataError", base.ptr());
    py::register_exception<NoConvergenceError>(m, "NoConvergenceError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());

    m.def(
        "transition_frequency",
        [](double ej_max, double ec, double phi) {
            QubitParams q = QubitParams::paper_preset();
            q.ej_max = ej_max;
            q.ec = ec;
            return transition_frequency(q, FluxBias{phi});
        },
        py::arg("ej_max") = 39.03, py::arg("ec") = 0.4, py::arg("phi") = 0.0,
        "Transmon 0-1 frequency in GHz at flux phi (in flux quanta).");

    m.def(
        "efficiency", [](double gamma1_e, double gamma2) { return efficiency(DecayRates::from_fit(gamma1_e, gamma2)); },
        py::arg("gamma1_e"), py::arg("gamma2"), "Source efficiency gamma1_e / (2 gamma2).");

    m.def(
        "reflection",
        [](const DArray &detuning, double gamma1_e, double gamma2, double rabi) {
            DecayRates rates = DecayRates::from_fit(gamma1_e, gamma2);
            auto d = to_vector<double>(detuning);
            std::vector<cplx> r(d.size());
            for (size_t i = 0; i < d.size(); ++i) {
                r[i] = reflection_coefficient(rates, gamma1_e, DrivePoint{d[i], rabi});
            }
            return to_array(r);
        },
        py::arg("detuning"), py::arg("gamma1_e"), py::arg("gamma2"), py::arg("rabi") = 0.0,
        "Reflection coefficient over a detuning grid (MHz).");

    m.def(
        "sample_heterodyne",
        [](const std::string &kind, double theta, double fidelity, cplx alpha, uint64_t n, uint64_t seed) {
            PreparedState s = kind == "qubit"      ? prepare_state(theta, fidelity)
                              : kind == "coherent" ? coherent_state(alpha)
                              : kind == "vacuum"   ? vacuum_state()
                                                   : throw ValidationError("unknown state kind " + kind);
            py::array_t<cplx> out({static_cast<py::ssize_t>(n), py::ssize_t{2}});
            auto o = out.mutable_unchecked<2>();
            {
                py::gil_scoped_release release;
                for (uint64_t i = 0; i < n; ++i) {
                    KeyedStream rng(seed, i, kPulseStreamBase);
                    ModeOutcome r = sample_joint_heterodyne(s, rng);
                    o(static_cast<py::ssize_t>(i), 0) = r.alpha;
                    o(static_cast<py::ssize_t>(i), 1) = r.beta;
                }
            }
            return out;
        },
        py::arg("kind") = "qubit", py::arg("theta") = 3.141592653589793, py::arg("fidelity") = 1.0,
        py::arg("alpha") = cplx{1.0, 0.0}, py::arg("n") = 1000, py::arg("seed") = 1,
        "Joint heterodyne outcomes (alpha, beta) of n independent preparations.");

    m.def(
        "lag_values",
        [](const CArray &a, const CArray &b, const IArray &lags, const IArray &gate) {
            auto av = to_vector<cplx>(a);
            auto bv = to_vector<cplx>(b);
            if (av.size() != bv.size()) {
                throw GeometryError("lag_values: traces differ in length");
            }
            auto lv = to_vector<int>(lags);
            auto gv = to_vector<int>(gate);
            ShotLagValues out;
            compute_lag_values(av, bv, lv, gv, out);
            py::dict d;
            d["g1"] = to_array(out.g1);
            d["g2"] = to_array(out.g2);
            d["paa"] = to_array(out.paa);
            d["pbb"] = to_array(out.pbb);
            d["g1r"] = to_array(out.g1r);
            d["g1s"] = to_array(out.g1s);
            d["g1z"] = to_array(out.g1z);
            return d;
        },
        py::arg("a"), py::arg("b"), py::arg("lags"), py::arg("gate") = IArray(0),
        "Per-lag correlation sums of one trace pair.");

    m.def(
        "fit_reflection",
        [](const DArray &detuning, const CArray &r) {
            auto d = to_vector<double>(detuning);
            auto rv = to_vector<cplx>(r);
            if (d.size() != rv.size()) {
                throw ValidationError("fit_reflection: array lengths differ");
            }
            std::vector<ReflectionPoint> pts;
            for (size_t i = 0; i < d.size(); ++i) {
                pts.push_back({d[i], rv[i]});
            }
            return fit_json(fit_reflection(pts));
        },
        py::arg("detuning"), py::arg("r"));

    m.def(
        "fit_flux_spectrum",
        [](const DArray &phi, const DArray &freq) {
            auto p = to_vector<double>(phi);
            auto f = to_vector<double>(freq);
            if (p.size() != f.size()) {
                throw ValidationError("fit_flux_spectrum: array lengths differ");
            }
            std::vector<FluxPoint> pts;
            for (size_t i = 0; i < p.size(); ++i) {
                pts.push_back({p[i], f[i]});
            }
            return fit_json(fit_flux_spectrum(pts));
        },
        py::arg("phi"), py::arg("frequency_ghz"));

    m.def(
        "fit_rabi",
        [](const DArray &theta, const DArray &values, const std::string &model) {
            auto t = to_vector<double>(theta);
            auto v = to_vector<double>(values);
            if (t.size() != v.size()) {
                throw ValidationError("fit_rabi: array lengths differ");
            }
            if (model != "quadrature" && model != "power") {
                throw ValidationError("fit_rabi: model must be quadrature or power");
            }
            std::vector<RabiPoint> pts;
            for (size_t i = 0; i < t.size(); ++i) {
                pts.push_back({t[i], v[i]});
            }
            return fit_json(fit_rabi(pts, model == "quadrature" ? RabiModel::Quadrature : RabiModel::Power));
        },
        py::arg("theta"), py::arg("values"), py::arg("model") = "quadrature");

    m.def(
        "g2_theory",
        [](double theta, double fidelity) {
            CorrelationTheory t = g2_theory(theta, fidelity);
            py::dict d;
            d["g1_center"] = t.g1_center;
            d["g1_side"] = t.g1_side;
            d["g2_center"] = t.g2_center;
            d["g2_side"] = t.g2_side;
            d["g2_ratio"] = t.g2_ratio();
            return d;
        },
        py::arg("theta"), py::arg("fidelity") = 1.0);

    m.def(
        "resolve_config", [](const std::string &text) { return config_from(text).to_json().dump(); },
        py::arg("config_json") = "", "Validated config with every default filled in, as JSON.");
    m.def(
        "config_hash", [](const std::string &text) { return config_from(text).hash(); }, py::arg("config_json") = "");

    m.def(
        "run_spectro",
        [](const std::string &text) {
            ExperimentConfig c = config_from(text);
            py::gil_scoped_release release;
            run_spectro(c);
            return c.output.dir;
        },
        py::arg("config_json") = "", "Runs the spectroscopy experiment; returns the output directory.");
    m.def(
        "run_hbt",
        [](const std::string &text) {
            ExperimentConfig c = config_from(text);
            py::gil_scoped_release release;
            run_hbt(c);
            return c.output.dir;
        },
        py::arg("config_json") = "", "Runs the HBT experiment; returns the output directory.");
    m.def(
        "run_rabi",
        [](const std::string &text) {
            ExperimentConfig c = config_from(text);
            py::gil_scoped_release release;
            run_rabi(c);
            return c.output.dir;
        },
        py::arg("config_json") = "", "Runs the Rabi sweep; returns the output directory.");
    m.def(
        "bench",
        [](const std::string &text, std::vector<int> workers, int repeats) {
            ExperimentConfig c = config_from(text);
            py::gil_scoped_release release;
            return bench_throughput(c, workers, repeats).to_json().dump();
        },
        py::arg("config_json") = "", py::arg("workers") = std::vector<int>{1}, py::arg("repeats") = 1);
    m.def("report", &report_directory, py::arg("dir"));

    m.def(
        "read_archive",
        [](const std::string &path) {
            ArchiveReader r(path);
            auto shots = r.read_all();
            const ArchiveHeader &h = r.header();
            py::dict header;
            header["version"] = h.version;
            header["sample_rate"] = h.sample_rate;
            header["trace_len"] = h.trace_len;
            header["n_shots"] = h.n_shots;
            header["n_pulses"] = h.n_pulses;
            header["if_freq"] = h.if_freq;
            header["layout"] = h.layout;
            return py::make_tuple(header, traces_array(shots, h.trace_len));
        },
        py::arg("path"), "Header dict and a (n_shots, 4, trace_len) complex64 array.");
}
