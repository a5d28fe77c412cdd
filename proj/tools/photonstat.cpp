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


// photonstat: command-line front end for spectroscopy, Rabi sweeps, HBT correlation runs,
// fitting, benchmarking and run reports.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "photonstat/config.hpp"
#include "photonstat/errors.hpp"
#include "photonstat/experiment.hpp"
#include "photonstat/manifest.hpp"

using namespace photonstat;

namespace {

enum Exit { kOk = 0, kValidation = 2, kRuntime = 3, kIo = 4 };

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Validation:
        case ErrorKind::Parse:
        case ErrorKind::Config:
        case ErrorKind::Domain:
            return kValidation;
        case ErrorKind::Io:
            return kIo;
        default:
            return kRuntime;
    }
}

struct CommonOptions {
    std::string config_path;
    std::string preset;
    std::optional<uint64_t> seed;
    std::optional<int> workers;
    std::optional<uint64_t> shots;
    std::optional<int> batches;
    std::optional<std::string> out;
    std::optional<double> n_add;
    bool store_traces = false;

    void attach(CLI::App *cmd, bool traces) {
        cmd->add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
        cmd->add_option("--preset", preset, "Load a named parameter preset")->check(CLI::IsMember({"paper"}));
        cmd->add_option("--seed", seed, "Master seed");
        cmd->add_option("--workers", workers, "Worker threads (PHOTONSTAT_THREADS overrides)");
        cmd->add_option("--shots", shots, "Shot count");
        cmd->add_option("--batches", batches, "Batches for error bars");
        cmd->add_option("--out", out, "Output directory");
        cmd->add_option("--nadd", n_add, "Added noise photons on both channels");
        if (traces) {
            cmd->add_flag("--store-traces", store_traces, "Write the raw traces to traces.phst");
        }
    }

    ExperimentConfig resolve() const {
        ExperimentConfig c = config_path.empty() ? default_config() : load_config(config_path);
        if (seed) {
            c.seed = *seed;
        }
        if (workers) {
            c.workers = *workers;
        }
        if (shots) {
            c.shots = *shots;
        }
        if (batches) {
            c.batches = *batches;
        }
        if (out) {
            c.output.dir = *out;
        }
        if (n_add) {
            c.chain.n_add_a = *n_add;
            c.chain.n_add_b = *n_add;
        }
        if (store_traces) {
            c.output.store_traces = true;
        }
        c.validate();
        return c;
    }
};

struct StateOptions {
    std::optional<std::string> kind;
    std::optional<double> theta;
    std::optional<double> fidelity;
    std::optional<double> alpha;

    void attach(CLI::App *cmd) {
        cmd->add_option("--state", kind, "Prepared state")->check(CLI::IsMember({"qubit", "coherent", "vacuum"}));
        cmd->add_option("--theta", theta, "Rabi angle theta_r in radians");
        cmd->add_option("--fidelity", fidelity, "Preparation fidelity");
        cmd->add_option("--alpha", alpha, "Real coherent amplitude");
    }

    void apply(ExperimentConfig &c) const {
        if (kind) {
            c.state.kind = *kind == "qubit" ? StateKind::QubitSuperposition
                           : *kind == "coherent" ? StateKind::Coherent
                                                 : StateKind::Vacuum;
        }
        if (theta) {
            c.state.theta_r = *theta;
        }
        if (fidelity) {
            c.state.fidelity = *fidelity;
        }
        if (alpha) {
            c.state.alpha = *alpha;
        }
        c.validate();
    }
};

void print_warnings(const ExperimentConfig &c) {
    for (const auto &w : c.warnings) {
        std::cerr << "warning: " << w << "\n";
    }
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"photonstat: single-photon source simulation and HBT correlation analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    CommonOptions spectro_opts, rabi_opts, hbt_opts, bench_opts;
    StateOptions hbt_state, rabi_state, bench_state;

    auto *spectro = app.add_subcommand("spectro", "Flux map, dip table and reflection power sweep");
    spectro_opts.attach(spectro, false);

    auto *rabi = app.add_subcommand("rabi", "Sweep the Rabi angle and fit the quadrature and power laws");
    rabi_opts.attach(rabi, false);
    rabi_state.attach(rabi);

    auto *hbt = app.add_subcommand("hbt", "Run the HBT correlation experiment");
    hbt_opts.attach(hbt, true);
    hbt_state.attach(hbt);

    auto *bench = app.add_subcommand("bench", "Measure end-to-end shot throughput");
    bench_opts.attach(bench, false);
    bench_state.attach(bench);
    std::vector<int> bench_workers;
    int repeats = 3;
    bench->add_option("--worker-counts", bench_workers, "Worker counts to time (default 1 and 4)")->delimiter(',');
    bench->add_option("--repeats", repeats, "Timed runs per worker count")->check(CLI::PositiveNumber);

    auto *fit = app.add_subcommand("fit", "Fit a CSV produced by spectro or rabi");
    std::string fit_kind;
    std::string fit_input;
    std::string fit_out;
    fit->add_option("kind", fit_kind, "reflection | flux | rabi-quad | rabi-power")
        ->required()
        ->check(CLI::IsMember({"reflection", "flux", "rabi-quad", "rabi-power"}));
    fit->add_option("csv", fit_input, "Input CSV")->required();
    fit->add_option("--out", fit_out, "Write the fit report JSON here");

    auto *report = app.add_subcommand("report", "Summarize and verify an output directory");
    std::string report_dir;
    report->add_option("dir", report_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kValidation;
    }

    try {
        if (*spectro) {
            ExperimentConfig c = spectro_opts.resolve();
            print_warnings(c);
            SpectroOutput out = run_spectro(c);
            std::cout << report_directory(c.output.dir);
        } else if (*rabi) {
            ExperimentConfig c = rabi_opts.resolve();
            rabi_state.apply(c);
            print_warnings(c);
            run_rabi(c);
            std::cout << report_directory(c.output.dir);
        } else if (*hbt) {
            ExperimentConfig c = hbt_opts.resolve();
            hbt_state.apply(c);
            print_warnings(c);
            run_hbt(c);
            std::cout << report_directory(c.output.dir);
        } else if (*bench) {
            ExperimentConfig c = bench_opts.resolve();
            bench_state.apply(c);
            if (bench_workers.empty()) {
                bench_workers = {1, bench_opts.workers.value_or(4)};
            }
            BenchReport r = bench_throughput(c, bench_workers, repeats);
            std::string text = r.to_json().dump(2) + "\n";
            write_text_file((std::filesystem::path(c.output.dir) / "bench.json").string(), text);
            std::cout << text;
        } else if (*fit) {
            FitKind kind = fit_kind == "reflection" ? FitKind::Reflection
                           : fit_kind == "flux"     ? FitKind::Flux
                           : fit_kind == "rabi-quad" ? FitKind::RabiQuadrature
                                                     : FitKind::RabiPower;
            std::string text = fit_report_json(fit_csv(fit_input, kind)).dump(2) + "\n";
            if (!fit_out.empty()) {
                write_text_file(fit_out, text);
            }
            std::cout << text;
        } else if (*report) {
            std::cout << report_directory(report_dir);
        }
    } catch (const Error &e) {
        std::cerr << "error (" << error_kind_name(e.kind()) << "): " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::filesystem::filesystem_error &e) {
        std::cerr << "error (io): " << e.what() << "\n";
        return kIo;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
    return kOk;
}
