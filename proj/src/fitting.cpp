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


#include "photonstat/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "photonstat/errors.hpp"

namespace photonstat {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd numeric_jacobian(const ResidualFn &f, const VectorXd &p, const VectorXd &r0) {
    MatrixXd J(r0.size(), p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        double h = 1e-6 * std::max(std::fabs(p[i]), 1e-3);
        VectorXd hi = p;
        VectorXd lo = p;
        hi[i] += h;
        lo[i] -= h;
        VectorXd rh;
        VectorXd rl;
        bool ok_hi = true;
        bool ok_lo = true;
        try {
            rh = f(hi);
        } catch (const Error &) {
            ok_hi = false;
        }
        try {
            rl = f(lo);
        } catch (const Error &) {
            ok_lo = false;
        }
        if (ok_hi && ok_lo) {
            J.col(i) = (rh - rl) / (2 * h);
        } else if (ok_hi) {
            J.col(i) = (rh - r0) / h;
        } else if (ok_lo) {
            J.col(i) = (r0 - rl) / h;
        } else {
            J.col(i).setZero();
        }
    }
    return J;
}

double r_squared(double ss_res, double ss_tot) {
    return ss_tot > 0 ? 1.0 - ss_res / ss_tot : (ss_res == 0 ? 1.0 : 0.0);
}

FitReport make_report(const LeastSquaresResult &res, const std::vector<std::string> &names, size_t n_points,
                      double ss_tot) {
    FitReport rep;
    for (size_t i = 0; i < names.size(); ++i) {
        auto k = static_cast<Eigen::Index>(i);
        rep.params.push_back({names[i], res.params[k], std::sqrt(std::max(res.covariance(k, k), 0.0))});
    }
    rep.residual_norm = res.residual_norm;
    rep.r_squared = r_squared(res.residual_norm * res.residual_norm, ss_tot);
    rep.n_points = n_points;
    rep.converged = res.converged;
    rep.iterations = res.iterations;
    return rep;
}

// sigma of g(p) from the covariance and the gradient of g.
double propagate(const MatrixXd &cov, const VectorXd &grad) {
    return std::sqrt(std::max(grad.dot(cov * grad), 0.0));
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Circle {
    std::complex<double> center;
    double radius;
};

void check_not_collinear(std::span<const std::complex<double>> z) {
    std::complex<double> mean{};
    for (auto v : z) {
        mean += v;
    }
    mean /= static_cast<double>(z.size());
    Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
    for (auto v : z) {
        Eigen::Vector2d d(v.real() - mean.real(), v.imag() - mean.imag());
        s += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(s);
    double lo = eig.eigenvalues()[0];
    double hi = eig.eigenvalues()[1];
    if (!(hi > 0) || lo <= 1e-12 * hi) {
        throw DegenerateDataError("reflection data are collinear in the complex plane (no resonance circle)");
    }
}

// Algebraic (Kasa) circle fit: minimizes sum (x^2 + y^2 + D x + E y + F)^2.
Circle kasa_circle(std::span<const std::complex<double>> z) {
    MatrixXd A(z.size(), 3);
    VectorXd b(z.size());
    for (size_t i = 0; i < z.size(); ++i) {
        auto k = static_cast<Eigen::Index>(i);
        A(k, 0) = z[i].real();
        A(k, 1) = z[i].imag();
        A(k, 2) = 1.0;
        b[k] = -std::norm(z[i]);
    }
    VectorXd s = A.colPivHouseholderQr().solve(b);
    std::complex<double> c(-s[0] / 2, -s[1] / 2);
    double r2 = std::norm(c) - s[2];
    if (!(r2 > 0) || !std::isfinite(r2)) {
        throw DegenerateDataError("circle fit failed on reflection data");
    }
    return {c, std::sqrt(r2)};
}

std::complex<double> weak_reflection(double g1e, double g2, double detuning) {
    return reflection_coefficient(DecayRates::from_fit(g1e, g2), g1e, DrivePoint{detuning, 0.0});
}

// Seeds (gamma1_e, gamma2, amplitude, phase) from the resonance circle.
VectorXd seed_reflection(std::span<const ReflectionPoint> data) {
    std::vector<std::complex<double>> z;
    for (const auto &p : data) {
        z.push_back(p.r);
    }
    check_not_collinear(z);
    Circle circle = kasa_circle(z);
    // The point closest to resonance, moved onto the circle; the background is its antipode.
    auto nearest = std::min_element(data.begin(), data.end(), [](const ReflectionPoint &a, const ReflectionPoint &b) {
        return std::fabs(a.detuning) < std::fabs(b.detuning);
    });
    std::complex<double> d = nearest->r - circle.center;
    std::complex<double> r0 = circle.center + circle.radius * (std::abs(d) > 0 ? d / std::abs(d) : 1.0);
    std::complex<double> bg = 2.0 * circle.center - r0;
    if (std::abs(bg) == 0) {
        throw DegenerateDataError("reflection circle passes through the origin");
    }
    double ratio = 2.0 * circle.radius / std::abs(bg);  // gamma1_e / gamma2
    std::vector<double> widths;
    for (const auto &p : data) {
        std::complex<double> one_minus = 1.0 - p.r / bg;
        if (p.detuning == 0.0 || std::abs(one_minus) == 0.0) {
            continue;
        }
        std::complex<double> q = ratio / one_minus;  // 1 - i d / gamma2
        if (q.imag() != 0.0) {
            double w = -p.detuning / q.imag();
            if (w > 0 && std::isfinite(w)) {
                widths.push_back(w);
            }
        }
    }
    double g2 = 0;
    if (!widths.empty()) {
        g2 = median(widths);
    } else {
        double lo = data.front().detuning;
        double hi = lo;
        for (const auto &p : data) {
            lo = std::min(lo, p.detuning);
            hi = std::max(hi, p.detuning);
        }
        g2 = std::max((hi - lo) / 10, 1e-6);
    }
    VectorXd p(4);
    p << ratio * g2, g2, std::abs(bg), std::arg(bg);
    return p;
}

double ss_total(std::span<const ReflectionPoint> data) {
    std::complex<double> mean{};
    for (const auto &p : data) {
        mean += p.r;
    }
    mean /= static_cast<double>(data.size());
    double ss = 0;
    for (const auto &p : data) {
        ss += std::norm(p.r - mean);
    }
    return ss;
}

void add_eta(FitReport &rep, const MatrixXd &cov) {
    double g1e = rep.params[0].value;
    double g2 = rep.params[1].value;
    VectorXd grad = VectorXd::Zero(cov.rows());
    grad[0] = 1.0 / (2 * g2);
    grad[1] = -g1e / (2 * g2 * g2);
    rep.derived.push_back({"eta", g1e / (2 * g2), propagate(cov, grad)});
}

}  // namespace

const FitParam &FitReport::get(const std::string &name) const {
    for (const auto *list : {&params, &derived}) {
        for (const auto &p : *list) {
            if (p.name == name) {
                return p;
            }
        }
    }
    throw std::out_of_range("fit report has no parameter " + name);
}

LeastSquaresResult levenberg_marquardt(const ResidualFn &residuals, VectorXd p, const LeastSquaresOptions &options) {
    VectorXd r = residuals(p);
    double norm = r.norm();
    MatrixXd J = numeric_jacobian(residuals, p, r);
    double lambda = 1e-3;
    LeastSquaresResult out;
    bool converged = norm == 0.0;
    int iter = 0;
    while (!converged && iter < options.max_iterations) {
        ++iter;
        MatrixXd JtJ = J.transpose() * J;
        VectorXd g = J.transpose() * r;
        if (g.norm() <= options.rel_tol * std::max(J.norm() * norm, std::numeric_limits<double>::min())) {
            converged = true;
            break;
        }
        bool accepted = false;
        while (!accepted) {
            MatrixXd A = JtJ;
            for (Eigen::Index i = 0; i < A.rows(); ++i) {
                double d = JtJ(i, i) > 0 ? JtJ(i, i) : 1.0;
                A(i, i) += lambda * d;
            }
            VectorXd step = A.ldlt().solve(-g);
            if (!step.allFinite() || step.norm() <= 1e-15 * (p.norm() + 1e-15)) {
                // No representable progress is left.
                converged = true;
                break;
            }
            VectorXd trial = p + step;
            double trial_norm = std::numeric_limits<double>::infinity();
            VectorXd trial_r;
            try {
                trial_r = residuals(trial);
                trial_norm = trial_r.norm();
            } catch (const Error &) {
            }
            if (std::isfinite(trial_norm) && trial_norm < norm) {
                double drop = (norm - trial_norm) / norm;
                p = trial;
                r = trial_r;
                norm = trial_norm;
                lambda = std::max(lambda / 3, 1e-12);
                accepted = true;
                if (drop <= options.rel_tol || norm == 0.0) {
                    converged = true;
                }
                J = numeric_jacobian(residuals, p, r);
            } else {
                lambda *= 4;
                if (lambda > 1e16) {
                    converged = true;
                    break;
                }
            }
        }
    }
    if (!converged) {
        std::ostringstream ss;
        ss << "least squares did not converge in " << options.max_iterations << " iterations (residual " << norm << ")";
        throw NoConvergenceError(ss.str());
    }
    out.params = p;
    out.residual_norm = norm;
    out.converged = true;
    out.iterations = iter;
    const auto m = static_cast<double>(r.size());
    const auto n = static_cast<double>(p.size());
    double s2 = norm * norm / std::max(m - n, 1.0);
    MatrixXd JtJ = J.transpose() * J;
    out.covariance = s2 * JtJ.completeOrthogonalDecomposition().pseudoInverse();
    return out;
}

FitReport fit_reflection(std::span<const ReflectionPoint> data, const LeastSquaresOptions &options) {
    if (data.size() < 6) {
        throw InsufficientDataError("fit_reflection needs at least 6 points");
    }
    VectorXd p0 = seed_reflection(data);
    ResidualFn f = [&](const VectorXd &p) {
        VectorXd r(2 * data.size());
        std::complex<double> bg = std::polar(p[2], p[3]);
        for (size_t i = 0; i < data.size(); ++i) {
            std::complex<double> d = bg * weak_reflection(p[0], p[1], data[i].detuning) - data[i].r;
            r[2 * static_cast<Eigen::Index>(i)] = d.real();
            r[2 * static_cast<Eigen::Index>(i) + 1] = d.imag();
        }
        return r;
    };
    LeastSquaresResult res = levenberg_marquardt(f, p0, options);
    FitReport rep = make_report(res, {"gamma1_e", "gamma2", "amplitude", "phase"}, data.size(), ss_total(data));
    add_eta(rep, res.covariance);
    return rep;
}

FitReport fit_reflection_power_sweep(std::span<const PowerSeries> series, const LeastSquaresOptions &options) {
    if (series.empty()) {
        throw InsufficientDataError("fit_reflection_power_sweep needs at least one power");
    }
    auto weakest = std::min_element(series.begin(), series.end(), [](const PowerSeries &a, const PowerSeries &b) {
        return a.power_dbm < b.power_dbm;
    });
    FitReport weak = fit_reflection(weakest->points, options);
    std::vector<ReflectionPoint> all;
    std::vector<double> power;
    for (const auto &s : series) {
        for (const auto &p : s.points) {
            all.push_back(p);
            power.push_back(s.power_dbm);
        }
    }
    ResidualFn f = [&](const VectorXd &p) {
        if (!(p[1] > 0)) {
            throw DomainError("gamma2 must be positive");
        }
        DecayRates rates = DecayRates::from_fit(p[0], p[1]);
        std::complex<double> bg = std::polar(p[2], p[3]);
        double k = std::pow(10.0, p[4]);
        VectorXd r(2 * all.size());
        for (size_t i = 0; i < all.size(); ++i) {
            DrivePoint dp{all[i].detuning, power_to_rabi(power[i], k)};
            std::complex<double> d = bg * reflection_coefficient(rates, p[0], dp) - all[i].r;
            r[2 * static_cast<Eigen::Index>(i)] = d.real();
            r[2 * static_cast<Eigen::Index>(i) + 1] = d.imag();
        }
        return r;
    };
    VectorXd p0(5);
    p0 << weak.params[0].value, weak.params[1].value, weak.params[2].value, weak.params[3].value, 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (double lk = -3.0; lk <= 15.0; lk += 0.05) {
        VectorXd trial = p0;
        trial[4] = lk;
        double c = f(trial).norm();
        if (c < best) {
            best = c;
            p0[4] = lk;
        }
    }
    LeastSquaresResult res = levenberg_marquardt(f, p0, options);
    std::span<const ReflectionPoint> all_span(all);
    FitReport rep =
        make_report(res, {"gamma1_e", "gamma2", "amplitude", "phase", "log10_k"}, all.size(), ss_total(all_span));
    add_eta(rep, res.covariance);
    double k = std::pow(10.0, res.params[4]);
    VectorXd grad = VectorXd::Zero(5);
    grad[4] = k * std::numbers::ln10;
    rep.derived.push_back({"k", k, propagate(res.covariance, grad)});
    return rep;
}

FitReport fit_flux_spectrum(std::span<const FluxPoint> data, const LeastSquaresOptions &options) {
    if (data.size() < 3) {
        throw InsufficientDataError("fit_flux_spectrum is underdetermined below 3 flux points");
    }
    auto model = [](double ej_max, double ec, double phi) {
        QubitParams q;
        q.ej_max = ej_max;
        q.ec = ec;
        return transition_frequency(q, FluxBias{phi});
    };
    // Seed: for a trial E_C, (f + E_C)^2 = 8 E_C E_Jmax |cos(pi phi)| is linear in E_Jmax.
    double best = std::numeric_limits<double>::infinity();
    VectorXd p0(2);
    p0 << 0.0, 0.0;
    for (int i = 0; i <= 400; ++i) {
        double ec = 0.02 * std::pow(100.0, i / 400.0);
        double sxy = 0;
        double sxx = 0;
        for (const auto &d : data) {
            double x = 8 * ec * std::fabs(std::cos(std::numbers::pi * d.phi_ratio));
            double y = (d.frequency_ghz + ec) * (d.frequency_ghz + ec);
            sxy += x * y;
            sxx += x * x;
        }
        if (!(sxx > 0)) {
            continue;
        }
        double ej = sxy / sxx;
        double cost = 0;
        for (const auto &d : data) {
            double ejp = ej * std::fabs(std::cos(std::numbers::pi * d.phi_ratio));
            double f = std::sqrt(8 * ejp * ec) - ec;
            cost += (f - d.frequency_ghz) * (f - d.frequency_ghz);
        }
        if (cost < best) {
            best = cost;
            p0 << ej, ec;
        }
    }
    if (!std::isfinite(best)) {
        throw DegenerateDataError("flux data carry no frequency information");
    }
    ResidualFn f = [&](const VectorXd &p) {
        VectorXd r(data.size());
        for (size_t i = 0; i < data.size(); ++i) {
            r[static_cast<Eigen::Index>(i)] = model(p[0], p[1], data[i].phi_ratio) - data[i].frequency_ghz;
        }
        return r;
    };
    LeastSquaresResult res = levenberg_marquardt(f, p0, options);
    f(res.params);  // propagates RegimeError for a fit outside the regime
    double mean = 0;
    for (const auto &d : data) {
        mean += d.frequency_ghz;
    }
    mean /= static_cast<double>(data.size());
    double ss = 0;
    for (const auto &d : data) {
        ss += (d.frequency_ghz - mean) * (d.frequency_ghz - mean);
    }
    return make_report(res, {"ej_max", "ec"}, data.size(), ss);
}

FitReport fit_rabi(std::span<const RabiPoint> data, RabiModel model, const LeastSquaresOptions &options) {
    if (data.size() < 8) {
        throw InsufficientDataError("fit_rabi needs at least 8 theta points");
    }
    auto shape = [model](double s, double theta) {
        if (model == RabiModel::Quadrature) {
            return std::sin(s * theta) / 2;
        }
        double v = std::sin(s * theta / 2);
        return v * v;
    };
    // Seed: scan the scale, solving amplitude and offset linearly at each value.
    VectorXd p0(3);
    p0 << 1.0, 1.0, 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 200; ++i) {
        double s = 0.5 + i * 0.005;
        MatrixXd A(data.size(), 2);
        VectorXd y(data.size());
        for (size_t k = 0; k < data.size(); ++k) {
            auto row = static_cast<Eigen::Index>(k);
            A(row, 0) = shape(s, data[k].theta);
            A(row, 1) = 1.0;
            y[row] = data[k].value;
        }
        VectorXd c = A.colPivHouseholderQr().solve(y);
        double cost = (A * c - y).squaredNorm();
        if (cost < best) {
            best = cost;
            p0 << c[0], s, c[1];
        }
    }
    ResidualFn f = [&](const VectorXd &p) {
        VectorXd r(data.size());
        for (size_t k = 0; k < data.size(); ++k) {
            r[static_cast<Eigen::Index>(k)] = p[0] * shape(p[1], data[k].theta) + p[2] - data[k].value;
        }
        return r;
    };
    LeastSquaresResult res = levenberg_marquardt(f, p0, options);
    double mean = 0;
    for (const auto &d : data) {
        mean += d.value;
    }
    mean /= static_cast<double>(data.size());
    double ss = 0;
    for (const auto &d : data) {
        ss += (d.value - mean) * (d.value - mean);
    }
    return make_report(res, {"amplitude", "theta_scale", "offset"}, data.size(), ss);
}

double CorrelationTheory::g2_ratio() const {
    return g2_side != 0.0 ? g2_center / g2_side : std::nan("");
}

CorrelationTheory g2_theory(double theta_r, double fidelity) {
    return g2_theory(prepare_state(theta_r, fidelity));
}

CorrelationTheory g2_theory(const PreparedState &state) {
    double n = state.mean_photons();
    CorrelationTheory t;
    t.g1_center = n / 2;
    t.g1_side = std::norm(state.mean_field()) / 2;
    t.g2_center = state.second_factorial_moment() / 4;
    t.g2_side = n * n / 4;
    return t;
}

double total_efficiency(const DecayRates &rates, double fidelity) {
    return efficiency(rates) * fidelity;
}

ShotEstimate shots_to_precision(const HbtSetup &setup, double n_add, double target_stderr,
                                const PreparedState &state, const PilotOptions &options) {
    if (!(n_add >= 0)) {
        throw DomainError("shots_to_precision: n_add must be non-negative");
    }
    if (!(target_stderr > 0)) {
        throw DomainError("shots_to_precision: target stderr must be positive");
    }
    if (options.pilot_batches < 2 || options.pilot_shots < static_cast<uint64_t>(options.pilot_batches)) {
        throw DomainError("shots_to_precision: pilot needs at least two non-empty batches");
    }
    auto pilot = [&](double noise, uint64_t salt) {
        HbtSetup s = setup;
        s.chain.n_add_a = noise;
        s.chain.n_add_b = noise;
        s.n_batches = options.pilot_batches;
        auto acc = simulate_hbt(s, state, options.pilot_shots, derive_seed(options.seed, kPilotStreamBase + salt),
                                options.workers);
        return peak_extract(finalize(acc.correlation), s.train);
    };
    PeakTable noisy = pilot(n_add, 0);
    PeakTable reference = pilot(0.0, 1);

    ShotEstimate est;
    est.reference_side = reference.g2_side_mean;
    est.reference_ratio = reference.g2_ratio;
    est.pilot_center_stderr = noisy.at(0).g2_stderr;
    est.pilot_side_stderr = noisy.g2_side_stderr;
    const auto n = static_cast<double>(options.pilot_shots);
    double var_c = est.pilot_center_stderr * est.pilot_center_stderr * n;
    double var_s = est.pilot_side_stderr * est.pilot_side_stderr * n;
    double r = est.reference_ratio;
    est.per_shot_variance = (var_c + r * r * var_s) / (est.reference_side * est.reference_side);
    est.shots = est.per_shot_variance / (target_stderr * target_stderr);
    return est;
}

}  // namespace photonstat
