// Copyright 2026 The tieq Authors
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

#include "tieq/tie_solver.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.h"
#include "tieq/config.h"
#include "tieq/errors.h"
#include "tieq/experiment.h"
#include "tieq/rng.h"

using namespace tieq;

namespace {

constexpr double kPi = std::numbers::pi;

TieOptions options(const Grid &g, double dz = 100.0, double i0 = 1000.0) {
    TieOptions o;
    o.dz_um = dz;
    o.k_wave = g.wavenumber();
    o.illum_mean = i0;
    return o;
}

DerivativeMap random_derivative(const Grid &g, std::uint64_t seed) {
    auto rng = make_rng(seed);
    std::normal_distribution<double> n;
    DerivativeMap d(g);
    for (auto &v : d.values()) {
        v = n(rng);
    }
    return d;
}

double max_abs(std::span<const double> v) {
    double m = 0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

IntensityFrame uniform_frame(const Grid &g, double value) {
    IntensityFrame f(g);
    for (auto &v : f.values()) {
        v = value;
    }
    return f;
}

}  // namespace

TEST(AxialDerivative, constructed_cases) {
    Grid g(8, 8, 5.0, 0.81);
    auto a = uniform_frame(g, 10.0);
    auto zero = axial_derivative(a, a, 50.0);
    for (double v : zero.values()) {
        EXPECT_EQ(v, 0.0);
    }
    auto b = uniform_frame(g, 10.0 + 2 * 50.0 * 0.3);
    auto slope = axial_derivative(b, a, 50.0);
    for (double v : slope.values()) {
        EXPECT_NEAR(v, 0.3, 1e-14);
    }
    EXPECT_THROW(axial_derivative(a, a, 0.0), ConfigError);
    EXPECT_THROW(axial_derivative(a, IntensityFrame(Grid(10, 8, 5.0, 0.81)), 1.0), ConfigError);
}

TEST(AxialDerivative, second_order_against_richardson) {
    ExperimentConfig cfg;
    ExperimentContext ctx(cfg);
    auto d = [&](double h) {
        auto p = ctx.defocus_point(h);
        return axial_derivative(retag<CountsTag>(p.plus), retag<CountsTag>(p.minus), h);
    };
    // Richardson extrapolation from h/2 and h/4 is accurate to O(h^4); the plain central
    // difference must converge to it at second order.
    const double h = 50.0;
    auto coarse = d(h), half = d(h / 2), quarter = d(h / 4);
    double err_coarse = 0, err_half = 0, norm = 0;
    for (size_t i = 0; i < coarse.values().size(); ++i) {
        double exact = (4 * quarter.values()[i] - half.values()[i]) / 3;
        err_coarse += std::pow(coarse.values()[i] - exact, 2);
        err_half += std::pow(half.values()[i] - exact, 2);
        norm += exact * exact;
    }
    EXPECT_LT(std::sqrt(err_coarse / norm), 0.25);
    EXPECT_NEAR(std::sqrt(err_half / err_coarse), 0.25, 0.04);
}

TEST(SolveTie, zero_input) {
    Grid g(16, 16, 5.0, 0.81);
    auto phi = solve_tie(DerivativeMap(g), options(g));
    for (double v : phi.values()) {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(SolveTie, cosine_modes) {
    Grid g(64, 32, 5.0, 0.81);
    const double amp = 0.7, i0 = 800.0;
    auto opt = options(g, 100.0, i0);
    for (auto [m, n] : std::vector<std::pair<int, int>>{{3, 0}, {0, 5}, {2, 7}, {17, 11}}) {
        DerivativeMap d(g);
        for (int y = 0; y < g.ny(); ++y) {
            for (int x = 0; x < g.nx(); ++x) {
                d.at(x, y) = amp * std::cos(kPi * m * (x + 0.5) / g.nx()) * std::cos(kPi * n * (y + 0.5) / g.ny());
            }
        }
        double qx = m / (2.0 * g.nx() * g.pitch_um()), qy = n / (2.0 * g.ny() * g.pitch_um());
        double expected_amp = opt.k_wave * amp / (4 * kPi * kPi * i0 * (qx * qx + qy * qy));
        auto phi = solve_tie(d, opt);
        double err = 0;
        for (int y = 0; y < g.ny(); ++y) {
            for (int x = 0; x < g.nx(); ++x) {
                double expected = expected_amp * d.at(x, y) / amp;
                err = std::max(err, std::abs(phi.at(x, y) - expected));
            }
        }
        EXPECT_LT(err, 1e-8 * expected_amp) << m << "," << n;
    }
}

TEST(SolveTie, dense_oracle) {
    Grid g(8, 8, 5.0, 0.81);
    for (double eps : {0.0, 0.3}) {
        auto d = random_derivative(g, 11);
        auto opt = options(g, 75.0, 500.0);
        opt.regularization_eps = eps;
        auto phi = solve_tie(d, opt);
        auto dense = tieq_test::dense_tie_solve(d.vector(), 8, 8, 5.0, opt.k_wave, 500.0, eps);
        double scale = max_abs(dense);
        for (size_t i = 0; i < dense.size(); ++i) {
            EXPECT_NEAR(phi.values()[i], dense[i], 1e-8 * scale) << i;
        }
    }
}

TEST(SolveTie, linear_and_gauge_fixed) {
    Grid g(32, 24, 5.0, 0.81);
    auto opt = options(g);
    opt.regularization_eps = 0.1;
    auto d1 = random_derivative(g, 1), d2 = random_derivative(g, 2);
    DerivativeMap mix(g);
    for (size_t i = 0; i < g.size(); ++i) {
        mix.values()[i] = 2.5 * d1.values()[i] - 0.75 * d2.values()[i] + 3.0;
    }
    auto p1 = solve_tie(d1, opt), p2 = solve_tie(d2, opt), pm = solve_tie(mix, opt);
    double scale = max_abs(pm.values());
    for (size_t i = 0; i < g.size(); ++i) {
        EXPECT_NEAR(pm.values()[i], 2.5 * p1.values()[i] - 0.75 * p2.values()[i], 1e-10 * scale);
    }
    EXPECT_NEAR(pm.mean(), 0.0, 1e-15 * scale);
}

TEST(SolveTie, rejects_bad_input) {
    Grid g(8, 8, 5.0, 0.81);
    DerivativeMap d(g);
    auto opt = options(g);
    opt.illum_mean = 0;
    EXPECT_THROW(solve_tie(d, opt), NumericError);
    opt = options(g);
    opt.dz_um = -1;
    EXPECT_THROW(solve_tie(d, opt), ConfigError);
    opt = options(g);
    opt.use_uniform_approx = false;
    EXPECT_THROW(solve_tie(d, opt), ConfigError);
    d.at(2, 2) = NAN;
    EXPECT_THROW(solve_tie(d, options(g)), NumericError);
}

TEST(SolveTie, noiseless_round_trip) {
    // Smooth bump, uniform light on a periodic grid: forward model then inversion.
    Grid g(64, 64, 5.0, 0.81);
    PhaseMap phi(g);
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            double rx = (x - 31.5) * 5.0, ry = (y - 27.0) * 5.0;
            phi.at(x, y) = 0.3 * std::exp(-(rx * rx + ry * ry) / (2 * 35.0 * 35.0));
        }
    }
    auto light = make_illumination(g, IlluminationSpec{IlluminationSpec::Profile::Uniform, 0.0, 0.0, 0.0}, 1000.0);
    auto d = defocused_intensities(light, phi, 50.0);
    auto rec = solve_tie(axial_derivative(retag<CountsTag>(d.plus), retag<CountsTag>(d.minus), 50.0),
                         options(g, 50.0, 1000.0));
    EXPECT_GT(tieq_test::plain_pearson(rec.vector(), phi.vector()), 0.99);
}

TEST(QuantumSubtract, gain_cases) {
    Grid g(8, 8, 5.0, 0.81);
    auto rng = make_rng(3);
    std::poisson_distribution<int> p(100);
    IntensityFrame s(g), i(g);
    IntensityMap mean(g);
    for (size_t k = 0; k < g.size(); ++k) {
        s.values()[k] = p(rng);
        i.values()[k] = p(rng);
        mean.values()[k] = 100.0;
    }
    EXPECT_EQ(quantum_subtract(s, i, mean, QuantumCorrection{0.0, true}), s);
    EXPECT_EQ(quantum_subtract(s, i, mean, QuantumCorrection{0.6, false}), s);
    auto out = quantum_subtract(s, i, mean, QuantumCorrection{0.6, true});
    IntensityMap kmap(g);
    for (auto &v : kmap.values()) {
        v = 0.6;
    }
    EXPECT_EQ(quantum_subtract(s, i, mean, kmap), out);
    for (size_t k = 0; k < g.size(); ++k) {
        EXPECT_DOUBLE_EQ(out.values()[k], s.values()[k] - 0.6 * (i.values()[k] - 100.0));
    }
    // Perfect twins with unit gain leave only the mean.
    auto twins = quantum_subtract(s, s, mean, QuantumCorrection{1.0, true});
    for (double v : twins.values()) {
        EXPECT_EQ(v, 100.0);
    }
    EXPECT_THROW(quantum_subtract(s, i, mean, QuantumCorrection{1.5, true}), ConfigError);
}

TEST(KOpt, identical_and_independent) {
    Grid g(16, 16, 5.0, 0.81);
    IntensityMap m(g);
    for (auto &v : m.values()) {
        v = 400.0;
    }
    std::vector<IntensityFrame> s, i;
    const int frames = 200;
    for (int f = 0; f < frames; ++f) {
        s.push_back(sample_signal_frame(m, 2 * f));
        i.push_back(sample_signal_frame(m, 2 * f + 1));
    }
    EXPECT_NEAR(estimate_k_opt(s, s).scalar, 1.0, 1e-12);
    auto indep = estimate_k_opt(s, i);
    EXPECT_LT(std::abs(indep.scalar), 3.0 / std::sqrt(frames * 256.0));
    EXPECT_THROW(estimate_k_opt(std::span(s).first(1), std::span(i).first(1)), ConfigError);
}

TEST(KOpt, matches_loss_law) {
    Grid g(32, 32, 5.0, 0.81);
    const double eta = 0.57, alpha = 0.007;
    IntensityMap i0(g), is(g);
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            i0.at(x, y) = 1000.0;
            is.at(x, y) = 1000.0 * (1 + ((x + y) % 2 ? alpha : -alpha));
        }
    }
    SourceModel src{1000.0, eta, 0.0, {0.0, 0.0}, 0.0};
    std::vector<TwinFrameSet> sets;
    for (int f = 0; f < 1000; ++f) {
        sets.push_back(sample_twin_frames(is, i0, src, 5000 + f));
    }
    EXPECT_NEAR(estimate_k_opt(sets).scalar, (1 - alpha) * eta, 0.02 * (1 - alpha) * eta);
}

TEST(NoiseModel, predicted_reduction) {
    EXPECT_EQ(predicted_noise_reduction(0.0, 0.3), 1.0);
    EXPECT_EQ(predicted_noise_reduction(1.0, 0.0), 0.0);
    EXPECT_NEAR(predicted_noise_reduction(0.57, 0.007), 0.6795, 2e-4);
    EXPECT_NEAR(predicted_noise_reduction(0.57, 0.0), 0.6751, 1e-4);
    EXPECT_THROW(predicted_noise_reduction(1.2, 0.0), ConfigError);
}

TEST(NoiseModel, artifact_spectrum) {
    Grid g(16, 16, 5.0, 0.81);
    auto opt = options(g, 100.0, 1000.0);
    for (double v : noise_artifact_spectrum(0.0, opt, g)) {
        EXPECT_EQ(v, 0.0);
    }
    auto s = noise_artifact_spectrum(30.0, opt, g);
    EXPECT_EQ(s[0], 0.0);
    EXPECT_NEAR(s[1] / s[2], 4.0, 1e-12);
    EXPECT_NEAR(s[16] / s[4 * 16], 16.0, 1e-12);
    double q = 1.0 / 80.0;
    EXPECT_NEAR(s[1], opt.k_wave * 30.0 / (4 * kPi * kPi * std::sqrt(2.0) * 1000.0 * 100.0 * q * q), 1e-12);
}

TEST(RadialSpectrum, single_mode_lands_in_its_ring) {
    Grid g(32, 32, 5.0, 0.81);
    PhaseMap phi(g);
    const int m = 6;
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            phi.at(x, y) = std::cos(kPi * m * (x + 0.5) / 32);
        }
    }
    auto bins = radial_power_spectrum(phi);
    ASSERT_EQ(bins.size(), 32u);
    EXPECT_NEAR(bins[0].q, 1.0 / 320.0, 1e-15);
    for (size_t r = 0; r < bins.size(); ++r) {
        if (static_cast<int>(r) + 1 == m) {
            EXPECT_GT(bins[r].power, 0.0);
        } else {
            EXPECT_LT(bins[r].power, 1e-18 * bins[m - 1].power) << r;
        }
    }
}
