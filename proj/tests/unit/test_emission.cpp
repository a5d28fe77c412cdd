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


#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "photonstat/emission.hpp"
#include "photonstat/errors.hpp"

using namespace photonstat;
using cplx = std::complex<double>;

namespace {

// Trapezoid rule over alpha, beta in [-L, L]^2 each; spectrally accurate for these
// Gaussian-weighted integrands.
cplx integrate(const PreparedState &s, const std::function<cplx(cplx, cplx)> &f) {
    const double L = 5.5;
    const double h = 0.25;
    const int n = static_cast<int>(std::lround(2 * L / h));
    std::vector<double> x(static_cast<size_t>(n + 1));
    for (int i = 0; i <= n; ++i) {
        x[static_cast<size_t>(i)] = -L + h * i;
    }
    cplx acc{};
    for (double ar : x) {
        for (double ai : x) {
            for (double br : x) {
                for (double bi : x) {
                    cplx a(ar, ai), b(br, bi);
                    acc += f(a, b) * joint_heterodyne_density(s, a, b);
                }
            }
        }
    }
    return acc * std::pow(h, 4);
}

struct Moments {
    cplx mean_a, mean_b, cross, fourth;
    double na, nb, nanb;
    double se_na, se_nanb;
};

Moments sample(const PreparedState &s, int n, uint64_t seed) {
    Moments m{};
    double na2 = 0, nanb2 = 0;
    for (int i = 0; i < n; ++i) {
        KeyedStream rng(seed, static_cast<uint64_t>(i), kPulseStreamBase);
        ModeOutcome o = sample_joint_heterodyne(s, rng);
        double a2 = std::norm(o.alpha), b2 = std::norm(o.beta);
        m.mean_a += o.alpha;
        m.mean_b += o.beta;
        m.cross += std::conj(o.alpha) * o.beta;
        m.fourth += std::conj(o.alpha * o.alpha) * o.beta * o.beta;
        m.na += a2;
        m.nb += b2;
        m.nanb += a2 * b2;
        na2 += a2 * a2;
        nanb2 += a2 * a2 * b2 * b2;
    }
    double N = n;
    m.mean_a /= N;
    m.mean_b /= N;
    m.cross /= N;
    m.fourth /= N;
    m.na /= N;
    m.nb /= N;
    m.nanb /= N;
    m.se_na = std::sqrt((na2 / N - m.na * m.na) / N);
    m.se_nanb = std::sqrt((nanb2 / N - m.nanb * m.nanb) / N);
    return m;
}

}  // namespace

TEST(States, Construction) {
    EXPECT_THROW(prepare_state(1.0, 1.5), DomainError);
    EXPECT_THROW(prepare_state(1.0, -0.1), DomainError);
    EXPECT_THROW(prepare_state(std::nan(""), 1.0), DomainError);
    PreparedState s = prepare_state(std::numbers::pi, 0.91);
    EXPECT_NEAR(s.mean_photons(), 0.91, 1e-15);
    EXPECT_NEAR(std::abs(s.mean_field()), 0.0, 1e-15);
    PreparedState h = prepare_state(std::numbers::pi / 2, 1.0);
    EXPECT_NEAR(h.mean_photons(), 0.5, 1e-15);
    EXPECT_NEAR(h.mean_field().real(), 0.5, 1e-15);
    EXPECT_EQ(h.second_factorial_moment(), 0.0);
    EXPECT_NEAR(coherent_state(2.0).second_factorial_moment(), 16.0, 1e-12);
}

TEST(Density, QuadratureOracleQubit) {
    for (auto [theta, F] : {std::pair{std::numbers::pi, 1.0}, {std::numbers::pi / 2, 0.9}, {1.0, 0.7}}) {
        PreparedState s = prepare_state(theta, F);
        double p1 = s.mean_photons();
        cplx mf = s.mean_field();
        EXPECT_NEAR(integrate(s, [](cplx, cplx) { return cplx(1.0); }).real(), 1.0, 1e-7);
        EXPECT_NEAR(integrate(s, [](cplx a, cplx) { return cplx(std::norm(a)); }).real(), 1.0 + p1 / 2, 1e-7);
        cplx cross = integrate(s, [](cplx a, cplx b) { return std::conj(a) * b; });
        EXPECT_NEAR(cross.real(), p1 / 2, 1e-7);
        EXPECT_NEAR(cross.imag(), 0.0, 1e-7);
        cplx mean = integrate(s, [](cplx a, cplx) { return a; });
        EXPECT_NEAR(std::abs(mean - mf / std::sqrt(2.0)), 0.0, 1e-7);
        cplx fourth = integrate(s, [](cplx a, cplx b) { return std::conj(a * a) * b * b; });
        EXPECT_NEAR(std::abs(fourth), 0.0, 1e-7);
        double nanb = integrate(s, [](cplx a, cplx b) { return cplx(std::norm(a) * std::norm(b)); }).real();
        EXPECT_NEAR(nanb, 1.0 + p1, 1e-7);
    }
}

TEST(Density, QuadratureOracleCoherent) {
    PreparedState s = coherent_state(cplx(0.8, 0.3));
    double n = std::norm(s.alpha);
    EXPECT_NEAR(integrate(s, [](cplx, cplx) { return cplx(1.0); }).real(), 1.0, 1e-7);
    cplx fourth = integrate(s, [](cplx a, cplx b) { return std::conj(a * a) * b * b; });
    EXPECT_NEAR(fourth.real(), n * n / 4, 1e-7);
    double nanb = integrate(s, [](cplx a, cplx b) { return cplx(std::norm(a) * std::norm(b)); }).real();
    EXPECT_NEAR(nanb, (1 + n / 2) * (1 + n / 2), 1e-7);
}

TEST(Sampler, SingleQubitMoments) {
    PreparedState s = prepare_state(std::numbers::pi, 1.0);
    const int n = 200000;
    Moments m = sample(s, n, 11);
    EXPECT_NEAR(m.na, 1.5, 5 * m.se_na);
    EXPECT_NEAR(m.nb, 1.5, 5 * m.se_na);
    // Photon budget: the two outputs share one photon, (E|a|^2 - 1) + (E|b|^2 - 1) = p1.
    EXPECT_NEAR(m.na + m.nb - 2.0, 1.0, 5 * std::sqrt(2.0) * m.se_na);
    EXPECT_NEAR(m.nanb, 2.0, 5 * m.se_nanb);
    EXPECT_NEAR(m.cross.real(), 0.5, 5 * std::sqrt(2.25 / n));
    EXPECT_NEAR(std::abs(m.fourth), 0.0, 5 * std::sqrt(12.0 / n));
}

TEST(Sampler, SuperpositionMeanField) {
    PreparedState s = prepare_state(std::numbers::pi / 2, 0.9);
    const int n = 200000;
    Moments m = sample(s, n, 12);
    double expected = 0.45 / std::sqrt(2.0);
    double se = std::sqrt(1.25 / 2 / n);
    EXPECT_NEAR(m.mean_a.real(), expected, 5 * se);
    EXPECT_NEAR(m.mean_b.real(), expected, 5 * se);
    EXPECT_NEAR(m.mean_a.imag(), 0.0, 5 * se);
    EXPECT_NEAR(m.na, 1.0 + 0.45 / 2, 5 * m.se_na);
}

TEST(Sampler, CoherentChannelsIndependent) {
    PreparedState s = coherent_state(1.0);
    const int n = 200000;
    Moments m = sample(s, n, 13);
    EXPECT_NEAR(m.nanb - m.na * m.nb, 0.0, 5 * m.se_nanb);
    EXPECT_NEAR(m.fourth.real(), 0.25, 5 * std::sqrt(30.0 / n));
}

TEST(Sampler, VacuumIsUnitNoise) {
    Moments m = sample(vacuum_state(), 100000, 14);
    EXPECT_NEAR(m.na, 1.0, 5 * m.se_na);
    EXPECT_NEAR(std::abs(m.cross), 0.0, 5 * std::sqrt(1.0 / 100000));
}

TEST(Sampler, AcceptanceRate) {
    // |1>: sup_r 2 r^2 exp(-r^2/2) = 4/e.
    EXPECT_NEAR(rejection_acceptance_rate(prepare_state(std::numbers::pi, 1.0)), std::numbers::e / 4, 1e-12);
    EXPECT_NEAR(rejection_acceptance_rate(prepare_state(0.0, 1.0)), 0.5, 1e-12);
    EXPECT_EQ(rejection_acceptance_rate(coherent_state(1.0)), 1.0);
}

TEST(Sampler, PulseTrainReproducible) {
    PulseTrainSpec spec;
    PreparedState s = prepare_state(std::numbers::pi, 1.0);
    auto a = sample_pulse_train(s, spec, 3, 17);
    auto b = sample_pulse_train(s, spec, 3, 17);
    ASSERT_EQ(a.size(), 2u);
    for (size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].alpha, b[i].alpha);
        EXPECT_EQ(a[i].pulse_index, static_cast<int>(i));
    }
    EXPECT_NE(a[0].alpha, a[1].alpha);
}

TEST(Envelope, NormalizedExponential) {
    DecayRates r = DecayRates::from_fit(2.65, 1.85);
    TemporalMode m = emission_envelope(r, 680e-9, 5e-9);
    EXPECT_EQ(m.size(), 136u);
    EXPECT_NEAR(m.norm(), 1.0, 1e-12);
    double rho = std::exp(-r.gamma1_per_second() * 5e-9 / 2);
    EXPECT_NEAR(m.decay_per_sample, rho, 1e-15);
    EXPECT_NEAR(m.samples[10].real() / m.samples[9].real(), rho, 1e-12);
    EXPECT_THROW(emission_envelope(r, 100e-9, 5e-9), TruncationError);
    EXPECT_THROW(emission_envelope(r, 680e-9, 0.0), DomainError);
}

TEST(PulseTrain, Validation) {
    PulseTrainSpec spec;
    EXPECT_NO_THROW(spec.validate());
    spec.n_pulses = 3;
    EXPECT_THROW(spec.validate(), ValidationError);
    spec = PulseTrainSpec{};
    spec.active_window = 2e-6;
    EXPECT_THROW(spec.validate(), ValidationError);
}
