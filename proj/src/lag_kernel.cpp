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


#include <algorithm>
#include <vector>

#include "photonstat/correlator.hpp"

namespace photonstat {

namespace {

struct Accum {
    double g1r = 0, g1i = 0, g2 = 0, par = 0, pai = 0, pbr = 0, pbi = 0;
    double rr = 0, ri = 0, sr = 0, si = 0, zr = 0, zi = 0;
};

// One lag; t runs over idx(k) for k in [k0, k1).
template <typename Index>
Accum lag_sums(const double *__restrict xr, const double *__restrict xi, const double *__restrict yr,
               const double *__restrict yi, long tau, long k0, long k1, Index idx) {
    Accum s;
    for (long k = k0; k < k1; ++k) {
        const long t = idx(k);
        const double a0r = xr[t], a0i = xi[t];
        const double a1r = xr[t + tau], a1i = xi[t + tau];
        const double b0r = yr[t], b0i = yi[t];
        const double b1r = yr[t + tau], b1i = yi[t + tau];
        // conj(a0) b1
        s.g1r += a0r * b1r + a0i * b1i;
        s.g1i += a0r * b1i - a0i * b1r;
        // p = a0 a1, q = b1 b0, Re[conj(p) q]
        const double pr = a0r * a1r - a0i * a1i;
        const double pi = a0r * a1i + a0i * a1r;
        const double qr = b1r * b0r - b1i * b0i;
        const double qi = b1r * b0i + b1i * b0r;
        s.g2 += pr * qr + pi * qi;
        s.par += pr;
        s.pai += pi;
        s.pbr += qr;
        s.pbi += qi;
        // conj(a1) b0, conj(a1) b1, conj(a0) b0
        s.rr += a1r * b0r + a1i * b0i;
        s.ri += a1r * b0i - a1i * b0r;
        s.sr += a1r * b1r + a1i * b1i;
        s.si += a1r * b1i - a1i * b1r;
        s.zr += a0r * b0r + a0i * b0i;
        s.zi += a0r * b0i - a0i * b0r;
    }
    return s;
}

}  // namespace

void compute_lag_values(std::span<const std::complex<double>> a, std::span<const std::complex<double>> b,
                        std::span<const int> lags, std::span<const int> gate, ShotLagValues &out) {
    const auto n = static_cast<long>(std::min(a.size(), b.size()));
    thread_local std::vector<double> ar, ai, br, bi;
    ar.resize(static_cast<size_t>(n));
    ai.resize(static_cast<size_t>(n));
    br.resize(static_cast<size_t>(n));
    bi.resize(static_cast<size_t>(n));
    for (long t = 0; t < n; ++t) {
        ar[t] = a[t].real();
        ai[t] = a[t].imag();
        br[t] = b[t].real();
        bi[t] = b[t].imag();
    }
    for (auto *v : {&out.g1, &out.paa, &out.pbb, &out.g1r, &out.g1s, &out.g1z}) {
        v->resize(lags.size());
    }
    out.g2.resize(lags.size());

    for (size_t l = 0; l < lags.size(); ++l) {
        const long tau = lags[l];
        const long t0 = std::max(0L, -tau);
        const long t1 = std::min(n, n - tau);
        Accum s;
        if (gate.empty()) {
            s = lag_sums(ar.data(), ai.data(), br.data(), bi.data(), tau, t0, t1, [](long k) { return k; });
        } else {
            const int *g = gate.data();
            long k0 = std::lower_bound(gate.begin(), gate.end(), t0) - gate.begin();
            long k1 = std::lower_bound(gate.begin(), gate.end(), t1) - gate.begin();
            s = lag_sums(ar.data(), ai.data(), br.data(), bi.data(), tau, k0, k1, [g](long k) { return long{g[k]}; });
        }
        out.g1[l] = {s.g1r, s.g1i};
        out.g2[l] = s.g2;
        out.paa[l] = {s.par, s.pai};
        out.pbb[l] = {s.pbr, s.pbi};
        out.g1r[l] = {s.rr, s.ri};
        out.g1s[l] = {s.sr, s.si};
        out.g1z[l] = {s.zr, s.zi};
    }
}

}  // namespace photonstat
