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


#ifndef PHOTONSTAT_FITTING_HPP
#define PHOTONSTAT_FITTING_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "photonstat/emission.hpp"
#include "photonstat/pipeline.hpp"
#include "photonstat/qubit_model.hpp"

namespace photonstat {

struct FitParam {
    std::string name;
    double value = 0.0;
    double sigma = 0.0;  // 1 sigma uncertainty
};

struct FitReport {
    std::vector<FitParam> params;
    std::vector<FitParam> derived;  // functions of the fitted parameters
    double residual_norm = 0.0;
    double r_squared = 0.0;
    size_t n_points = 0;
    bool converged = false;
    int iterations = 0;

    /// Looks a parameter up among params, then derived. Throws std::out_of_range.
    const FitParam &get(const std::string &name) const;
    double value(const std::string &name) const {
        return get(name).value;
    }
};

struct LeastSquaresOptions {
    double rel_tol = 1e-10;
    int max_iterations = 200;
};

/// Residual vector of a least-squares problem at parameter vector p.
using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd &p)>;

struct LeastSquaresResult {
    Eigen::VectorXd params;
    Eigen::MatrixXd covariance;  // s^2 (J^T J)^-1, s^2 = |r|^2 / (m - n)
    double residual_norm = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) with a central-difference Jacobian. Stops when
/// an accepted step lowers |r| by less than rel_tol relative, or the gradient J^T r
/// vanishes. Trial points where `residuals` throws are rejected like uphill steps.
/// Throws NoConvergenceError after max_iterations.
LeastSquaresResult levenberg_marquardt(const ResidualFn &residuals, Eigen::VectorXd p0,
                                       const LeastSquaresOptions &options = {});

struct ReflectionPoint {
    double detuning = 0.0;  // MHz
    std::complex<double> r{};
};

/// Fits r = A exp(i phi) [1 - (g1e/g2) / (1 - i d/g2)] to weak-drive data. Seeds from an
/// algebraic circle fit. Parameters gamma1_e, gamma2, amplitude, phase; derived eta.
/// Throws InsufficientDataError below 6 points, DegenerateDataError for collinear data.
FitReport fit_reflection(std::span<const ReflectionPoint> data, const LeastSquaresOptions &options = {});

struct PowerSeries {
    double power_dbm = 0.0;
    std::vector<ReflectionPoint> points;
};

/// Joint fit of reflection curves at several probe powers with shared gamma1_e, gamma2,
/// background and conversion constant k (Omega = k sqrt(P_mW)), with gamma1 = 2 gamma2.
/// Parameters gamma1_e, gamma2, amplitude, phase, log10_k; derived eta and k.
FitReport fit_reflection_power_sweep(std::span<const PowerSeries> series, const LeastSquaresOptions &options = {});

struct FluxPoint {
    double phi_ratio = 0.0;
    double frequency_ghz = 0.0;
};

/// Fits (ej_max, ec) against transition_frequency. Throws InsufficientDataError below 3
/// points and RegimeError when the best fit leaves the transmon regime.
FitReport fit_flux_spectrum(std::span<const FluxPoint> data, const LeastSquaresOptions &options = {});

enum class RabiModel {
    Quadrature,  // A sin(s theta)/2 + c
    Power,       // A sin^2(s theta/2) + c
};

struct RabiPoint {
    double theta = 0.0;
    double value = 0.0;
};

/// Parameters amplitude, theta_scale, offset. Throws InsufficientDataError below 8 points.
FitReport fit_rabi(std::span<const RabiPoint> data, RabiModel model, const LeastSquaresOptions &options = {});

/// Correlation-peak predictions per pulse pair, in photon units of one HBT output:
/// G1 centre p1/2, G1 side |<a>|^2/2, G2 centre <a^dag^2 a^2>/4, G2 side p1^2/4.
struct CorrelationTheory {
    double g1_center = 0.0;
    double g1_side = 0.0;
    double g2_center = 0.0;
    double g2_side = 0.0;

    /// g2_center / g2_side; NaN when the side peak vanishes.
    double g2_ratio() const;
};

CorrelationTheory g2_theory(double theta_r, double fidelity);
CorrelationTheory g2_theory(const PreparedState &state);

/// eta * F.
double total_efficiency(const DecayRates &rates, double fidelity);

struct PilotOptions {
    uint64_t pilot_shots = 20000;
    int pilot_batches = 20;
    uint64_t seed = 1;
    int workers = 1;
};

struct ShotEstimate {
    double shots = 0.0;               // to reach the target stderr
    double per_shot_variance = 0.0;   // of the G2 ratio
    double pilot_center_stderr = 0.0;
    double pilot_side_stderr = 0.0;
    double reference_side = 0.0;      // side peak from the n_add = 0 reference pilot
    double reference_ratio = 0.0;
};

/// Pilot-run estimate of the shots needed for a target stderr on G2(0)/<G2(n t_p)>. The
/// peak scatter comes from a pilot at the requested n_add, the peak values from a
/// noise-free reference pilot, and the ratio variance is propagated to first order:
///     var = [var(c) + R^2 var(s)] / S^2,   shots = var * pilot_shots / target^2.
ShotEstimate shots_to_precision(const HbtSetup &setup, double n_add, double target_stderr,
                                const PreparedState &state, const PilotOptions &options = {});

}  // namespace photonstat

#endif
