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

#ifndef PHOTONSTAT_QUBIT_MODEL_HPP
#define PHOTONSTAT_QUBIT_MODEL_HPP

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace photonstat {

// Frequencies are in GHz and rates in MHz, both as ordinary (not angular) frequencies,
// i.e. the quantities usually quoted as E/2pi and Gamma/2pi.

/// Smallest E_J/E_C for which the transmon dispersion is trusted.
inline constexpr double kTransmonRegimeFloor = 20.0;

struct QubitParams {
    double ej_max = 39.03;         // GHz
    double ec = 0.400;             // GHz
    double gamma1_e = 2.65;        // MHz, radiative decay into the waveguide
    double gamma1_c = 0.0;         // MHz, decay through the control line
    double gamma1_n = 1.05;        // MHz, non-radiative loss
    double gamma_phi = 0.0;        // MHz, pure dephasing
    double resonator_freq = 6.751; // GHz, stored only
    double quoted_t1_ns = 60.0;    // measured T1 quoted alongside the rates; 0 disables the check

    /// Device values of the tantalum source. The split of the 1.05 MHz non-radiative
    /// remainder between gamma1_c and gamma1_n is not known and is put in gamma1_n.
    static QubitParams paper_preset();

    /// Throws ValidationError on hard violations; returns soft warnings (regime,
    /// inconsistency between the quoted T1 and the summed rates).
    std::vector<std::string> validate() const;
};

struct DecayRates {
    double gamma1_e = 0.0;  // MHz
    double gamma1 = 0.0;    // MHz, gamma1_e + gamma1_c + gamma1_n
    double gamma2 = 0.0;    // MHz, gamma1/2 + gamma_phi
    double eta = 0.0;       // gamma1_e / gamma1

    static DecayRates from_params(const QubitParams &params);

    /// Rates as a reflection fit reports them: only gamma1_e and gamma2 are known, and
    /// gamma1 is taken as 2*gamma2 (no pure dephasing).
    static DecayRates from_fit(double gamma1_e, double gamma2);

    /// gamma1 as an angular rate in 1/s.
    double gamma1_per_second() const;
};

struct FluxBias {
    double phi_ratio = 0.0;  // applied flux over the flux quantum
};

struct DrivePoint {
    double detuning = 0.0;  // MHz, probe minus qubit frequency
    double rabi_amp = 0.0;  // MHz, drive amplitude Omega
};

/// Josephson energy at the given flux for symmetric junctions, in GHz.
double josephson_energy(const QubitParams &params, FluxBias flux);

/// 0-1 transition frequency in GHz. Throws RegimeError when E_J/E_C drops below the
/// transmon floor.
double transition_frequency(const QubitParams &params, FluxBias flux);

/// Smallest flux in [0, 0.5] whose transition frequency matches `target_ghz` to 1 kHz.
/// Throws UnreachableError above the sweet spot or below the regime floor.
FluxBias flux_for_frequency(const QubitParams &params, double target_ghz);

/// Complex reflection of the driven two-level emitter. At zero drive this is exactly
/// r = 1 - (g1e/g2) / (1 - i*d/g2); with drive the denominator picks up Omega^2/(g1*g2).
std::complex<double> reflection_coefficient(const DecayRates &rates, double gamma1_e, DrivePoint point);

/// Source efficiency gamma1_e / (2*gamma2).
double efficiency(const DecayRates &rates);

/// Maps a probe power in dBm to a Rabi rate in MHz: Omega = k * sqrt(P_mW).
double power_to_rabi(double power_dbm, double rabi_per_sqrt_mw);

struct SpectrumMap {
    std::vector<double> flux;
    std::vector<double> probe_ghz;
    std::vector<double> magnitude;      // row-major, flux.size() x probe_ghz.size()
    std::vector<bool> masked;           // per flux column, outside the transmon regime
    std::vector<double> transition_ghz; // NaN where masked

    double at(size_t flux_index, size_t probe_index) const {
        return magnitude[flux_index * probe_ghz.size() + probe_index];
    }
};

/// |r| over a (flux, probe frequency) grid at zero drive. Columns outside the regime
/// are masked to unit magnitude.
SpectrumMap flux_spectrum_map(const QubitParams &params, std::span<const double> flux_grid,
                              std::span<const double> probe_grid_ghz);

}  // namespace photonstat

#endif
