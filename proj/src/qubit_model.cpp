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

#include "photonstat/qubit_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "photonstat/errors.hpp"

namespace photonstat {

namespace {

// Distance of the flux from the nearest integer flux quantum, in [0, 0.5].
double folded_flux(double phi_ratio) {
    return std::fabs(std::remainder(phi_ratio, 1.0));
}

double dispersion(double ej, double ec) {
    return std::sqrt(8.0 * ej * ec) - ec;
}

}  // namespace

QubitParams QubitParams::paper_preset() {
    return QubitParams{};
}

std::vector<std::string> QubitParams::validate() const {
    auto fail = [](const std::string &msg) { throw ValidationError("qubit: " + msg); };
    for (auto [name, value] : {std::pair{"ej_max", ej_max}, {"ec", ec}, {"gamma1_e", gamma1_e},
                               {"gamma1_c", gamma1_c}, {"gamma1_n", gamma1_n}, {"gamma_phi", gamma_phi},
                               {"resonator_freq", resonator_freq}, {"quoted_t1_ns", quoted_t1_ns}}) {
        if (!std::isfinite(value)) {
            fail(std::string(name) + " must be finite");
        }
    }
    if (gamma1_e < 0 || gamma1_c < 0 || gamma1_n < 0 || gamma_phi < 0) {
        fail("decay and dephasing rates must be non-negative");
    }
    if (!(ec > 0)) {
        fail("ec must be positive");
    }
    if (!(ej_max > ec)) {
        fail("ej_max must exceed ec");
    }

    std::vector<std::string> warnings;
    if (ej_max / ec < kTransmonRegimeFloor) {
        std::ostringstream ss;
        ss << "ej_max/ec = " << ej_max / ec << " is below the transmon floor of " << kTransmonRegimeFloor;
        warnings.push_back(ss.str());
    }
    double gamma1 = gamma1_e + gamma1_c + gamma1_n;
    if (quoted_t1_ns > 0 && gamma1 > 0) {
        double gamma1_from_t1 = 1e3 / (2.0 * std::numbers::pi * quoted_t1_ns);
        if (std::fabs(gamma1_from_t1 - gamma1) > 0.1 * gamma1) {
            std::ostringstream ss;
            ss << "quoted T1 of " << quoted_t1_ns << " ns implies gamma1/2pi = " << gamma1_from_t1
               << " MHz, but the rates sum to " << gamma1 << " MHz (eta from rates = " << gamma1_e / gamma1
               << ", eta from T1 = " << gamma1_e / gamma1_from_t1 << ")";
            warnings.push_back(ss.str());
        }
    }
    return warnings;
}

DecayRates DecayRates::from_params(const QubitParams &params) {
    DecayRates r;
    r.gamma1_e = params.gamma1_e;
    r.gamma1 = params.gamma1_e + params.gamma1_c + params.gamma1_n;
    r.gamma2 = r.gamma1 / 2.0 + params.gamma_phi;
    r.eta = r.gamma1 > 0 ? r.gamma1_e / r.gamma1 : 0.0;
    return r;
}

DecayRates DecayRates::from_fit(double gamma1_e, double gamma2) {
    DecayRates r;
    r.gamma1_e = gamma1_e;
    r.gamma2 = gamma2;
    r.gamma1 = 2.0 * gamma2;
    r.eta = r.gamma1 > 0 ? gamma1_e / r.gamma1 : 0.0;
    return r;
}

double DecayRates::gamma1_per_second() const {
    return 2.0 * std::numbers::pi * gamma1 * 1e6;
}

double josephson_energy(const QubitParams &params, FluxBias flux) {
    return params.ej_max * std::fabs(std::cos(std::numbers::pi * folded_flux(flux.phi_ratio)));
}

double transition_frequency(const QubitParams &params, FluxBias flux) {
    if (!std::isfinite(flux.phi_ratio)) {
        throw DomainError("flux bias must be finite");
    }
    double ej = josephson_energy(params, flux);
    if (ej < kTransmonRegimeFloor * params.ec) {
        std::ostringstream ss;
        ss << "E_J/E_C = " << ej / params.ec << " at phi = " << flux.phi_ratio << " is below the transmon floor of "
           << kTransmonRegimeFloor;
        throw RegimeError(ss.str());
    }
    return dispersion(ej, params.ec);
}

FluxBias flux_for_frequency(const QubitParams &params, double target_ghz) {
    double f_max = transition_frequency(params, FluxBias{0.0});
    if (target_ghz > f_max) {
        std::ostringstream ss;
        ss << "target " << target_ghz << " GHz is above the sweet-spot frequency " << f_max << " GHz";
        throw UnreachableError(ss.str());
    }
    // Edge of the valid band: |cos(pi*phi)| = floor * ec / ej_max.
    double phi_edge = std::acos(kTransmonRegimeFloor * params.ec / params.ej_max) / std::numbers::pi;
    double f_edge = dispersion(kTransmonRegimeFloor * params.ec, params.ec);
    if (target_ghz < f_edge) {
        std::ostringstream ss;
        ss << "target " << target_ghz << " GHz is below the lowest transmon-regime frequency " << f_edge << " GHz";
        throw UnreachableError(ss.str());
    }
    if (target_ghz == f_max) {
        return FluxBias{0.0};
    }

    // Frequency falls monotonically on [0, phi_edge].
    double lo = 0.0;
    double hi = phi_edge;
    for (int iter = 0; iter < 200 && hi - lo > 1e-15; ++iter) {
        double mid = 0.5 * (lo + hi);
        double f = dispersion(josephson_energy(params, FluxBias{mid}), params.ec);
        if (f > target_ghz) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return FluxBias{0.5 * (lo + hi)};
}

std::complex<double> reflection_coefficient(const DecayRates &rates, double gamma1_e, DrivePoint point) {
    if (!(rates.gamma2 > 0)) {
        throw DomainError("reflection_coefficient requires gamma2 > 0");
    }
    if (point.rabi_amp < 0) {
        throw DomainError("rabi_amp must be non-negative");
    }
    double x = point.detuning / rates.gamma2;
    if (point.rabi_amp == 0.0) {
        return 1.0 - (gamma1_e / rates.gamma2) / std::complex<double>(1.0, -x);
    }
    double saturation = rates.gamma1 > 0 ? point.rabi_amp * point.rabi_amp / (rates.gamma1 * rates.gamma2)
                                         : std::numeric_limits<double>::infinity();
    double denom = 1.0 + x * x + saturation;
    return 1.0 - (gamma1_e / rates.gamma2) * std::complex<double>(1.0, x) / denom;
}

double efficiency(const DecayRates &rates) {
    if (!(rates.gamma2 > 0)) {
        throw DomainError("efficiency requires gamma2 > 0");
    }
    return rates.gamma1_e / (2.0 * rates.gamma2);
}

double power_to_rabi(double power_dbm, double rabi_per_sqrt_mw) {
    return rabi_per_sqrt_mw * std::pow(10.0, power_dbm / 20.0);
}

SpectrumMap flux_spectrum_map(const QubitParams &params, std::span<const double> flux_grid,
                              std::span<const double> probe_grid_ghz) {
    auto monotone = [](std::span<const double> g) {
        return std::is_sorted(g.begin(), g.end()) || std::is_sorted(g.rbegin(), g.rend());
    };
    if (flux_grid.empty() || probe_grid_ghz.empty()) {
        throw ValidationError("flux_spectrum_map: grids must be non-empty");
    }
    if (!monotone(flux_grid) || !monotone(probe_grid_ghz)) {
        throw ValidationError("flux_spectrum_map: grids must be monotone");
    }

    DecayRates rates = DecayRates::from_params(params);
    SpectrumMap map;
    map.flux.assign(flux_grid.begin(), flux_grid.end());
    map.probe_ghz.assign(probe_grid_ghz.begin(), probe_grid_ghz.end());
    map.magnitude.assign(flux_grid.size() * probe_grid_ghz.size(), 1.0);
    map.masked.assign(flux_grid.size(), false);
    map.transition_ghz.assign(flux_grid.size(), std::numeric_limits<double>::quiet_NaN());

    for (size_t i = 0; i < flux_grid.size(); ++i) {
        double f01;
        try {
            f01 = transition_frequency(params, FluxBias{flux_grid[i]});
        } catch (const RegimeError &) {
            map.masked[i] = true;
            continue;
        }
        map.transition_ghz[i] = f01;
        for (size_t j = 0; j < probe_grid_ghz.size(); ++j) {
            double detuning_mhz = (probe_grid_ghz[j] - f01) * 1e3;
            map.magnitude[i * probe_grid_ghz.size() + j] =
                std::abs(reflection_coefficient(rates, rates.gamma1_e, DrivePoint{detuning_mhz, 0.0}));
        }
    }
    return map;
}

}  // namespace photonstat
