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

#include "tieq/metrics.h"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "tieq/errors.h"
#include "tieq/samples.h"

using namespace tieq;

namespace {

PhaseMap wavy(const Grid &g, double phase) {
    PhaseMap p(g);
    for (int y = 0; y < g.ny(); ++y) {
        for (int x = 0; x < g.nx(); ++x) {
            p.at(x, y) = std::sin(0.3 * x + phase) * std::cos(0.2 * y) + 0.01 * x;
        }
    }
    return p;
}

}  // namespace

TEST(Pearson, identity_affine_and_symmetry) {
    Grid g(24, 20, 5.0, 0.81);
    auto a = wavy(g, 0.0), b = wavy(g, 0.9);
    EXPECT_NEAR(pearson(a, a), 1.0, 1e-15);
    PhaseMap scaled(g), flipped(g);
    for (size_t i = 0; i < g.size(); ++i) {
        scaled.values()[i] = 3.0 * a.values()[i] - 2.0;
        flipped.values()[i] = -0.5 * a.values()[i] + 7.0;
    }
    EXPECT_NEAR(pearson(scaled, a), 1.0, 1e-12);
    EXPECT_NEAR(pearson(flipped, a), -1.0, 1e-12);
    EXPECT_DOUBLE_EQ(pearson(a, b), pearson(b, a));
    double c = pearson(a, b);
    EXPECT_GT(c, -1.0);
    EXPECT_LT(c, 1.0);
}

TEST(Pearson, border_is_excluded) {
    Grid g(16, 16, 5.0, 0.81);
    auto a = wavy(g, 0.0);
    auto b = a;
    for (int x = 0; x < 16; ++x) {
        b.at(x, 0) = 100.0;
        b.at(x, 15) = -100.0;
    }
    EXPECT_NEAR(pearson(b, a, 1), 1.0, 1e-12);
    EXPECT_LT(pearson(b, a, 0), 0.9);
    EXPECT_THROW(pearson(a, a, 8), ConfigError);
}

TEST(Pearson, constant_map_is_an_error) {
    Grid g(16, 16, 5.0, 0.81);
    EXPECT_THROW(pearson(PhaseMap(g), wavy(g, 0.0)), NumericError);
    EXPECT_THROW(pearson(wavy(g, 0.0), PhaseMap(g)), NumericError);
    EXPECT_THROW(pearson(wavy(g, 0.0), PhaseMap(Grid(8, 8, 5.0, 0.81))), ConfigError);
}

TEST(PhaseStep, synthetic_step) {
    Grid g(80, 80, 5.0, 0.81);
    auto sample = make_sample(SampleKind::PiGlyph, 0.230, g);
    auto rois = default_step_rois(SampleKind::PiGlyph, g);
    ASSERT_TRUE(rois.has_value());
    EXPECT_NEAR(phase_step_estimate(sample, rois->inside, rois->outside), 0.230, 1e-15);
    EXPECT_EQ(phase_step_estimate(PhaseMap(g), rois->inside, rois->outside), 0.0);
    auto shifted = sample;
    for (auto &v : shifted.values()) {
        v += 1.25;
    }
    EXPECT_NEAR(phase_step_estimate(shifted, rois->inside, rois->outside), 0.230, 1e-12);
}

TEST(PhaseStep, roi_validation) {
    Grid g(16, 16, 5.0, 0.81);
    PhaseMap p(g);
    Roi a{0, 0, 4, 4}, b{3, 3, 4, 4}, c{8, 0, 4, 4};
    EXPECT_TRUE(a.overlaps(b));
    EXPECT_FALSE(a.overlaps(c));
    EXPECT_THROW(phase_step_estimate(p, a, b), ConfigError);
    EXPECT_THROW(phase_step_estimate(p, a, Roi{14, 0, 4, 4}), ConfigError);
    EXPECT_THROW(phase_step_estimate(p, a, Roi{8, 8, 0, 4}), ConfigError);
    EXPECT_NO_THROW(phase_step_estimate(p, a, c));
}

TEST(EnsembleStats, closed_forms) {
    std::vector<double> same{2.5, 2.5, 2.5};
    auto s = ensemble_stats(same);
    EXPECT_EQ(s.mean, 2.5);
    EXPECT_EQ(s.std_dev, 0.0);
    EXPECT_EQ(s.n_samples, 3);

    std::vector<double> two{0.0, 2.0};
    auto t = ensemble_stats(two);
    EXPECT_DOUBLE_EQ(t.mean, 1.0);
    EXPECT_DOUBLE_EQ(t.std_dev, std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(t.std_error, 1.0);

    std::vector<double> one{1.0};
    EXPECT_THROW(ensemble_stats(one), ConfigError);
}
