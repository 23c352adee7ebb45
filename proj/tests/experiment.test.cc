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

#include "tieq/experiment.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "tieq/errors.h"
#include "tieq/metrics.h"

using namespace tieq;

namespace {

std::string slurp(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

ExperimentConfig small_config(const std::string &name) {
    ExperimentConfig c;
    c.out_dir = (std::filesystem::temp_directory_path() / name).string();
    std::filesystem::remove_all(c.out_dir);
    c.dz_um = {50, 150};
    c.frames_per_point = 3;
    c.calibration_frames = 20;
    c.modes = {Mode::parse("classical"), Mode::parse("quantum"), Mode::parse("multi_frame(5)")};
    return c;
}

std::vector<double> ranks(const std::vector<double> &v) {
    std::vector<size_t> idx(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        idx[i] = i;
    }
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (size_t i = 0; i < idx.size(); ++i) {
        r[idx[i]] = static_cast<double>(i);
    }
    return r;
}

}  // namespace

TEST(Experiment, minimal_run) {
    auto c = small_config("tieq_exp_minimal");
    c.dz_um = {50};
    c.frames_per_point = 1;
    c.modes = {Mode::parse("classical")};
    auto report = run_experiment(c);
    ASSERT_EQ(report.rows.size(), 1u);
    EXPECT_EQ(report.rows[0].mode, "classical");
    EXPECT_EQ(report.rows[0].dz_um, 50.0);
    EXPECT_EQ(report.config_hash, config_hash(c));
    EXPECT_NE(std::find(report.files.begin(), report.files.end(), "images/classical_dz50_f0.pgm"), report.files.end());
    for (const auto &f : report.files) {
        EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(c.out_dir) / f)) << f;
    }
    std::string csv = slurp(std::filesystem::path(c.out_dir) / "metrics.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "dz_um,mode,frame_seed,pearson,phase_step_rad,alpha,k_opt");
    auto manifest = nlohmann::json::parse(slurp(std::filesystem::path(c.out_dir) / "manifest.json"));
    EXPECT_EQ(manifest["config_hash"], report.config_hash);
    EXPECT_EQ(manifest["files"].size(), report.files.size());
    EXPECT_EQ(manifest["seed"], c.seed);
    std::filesystem::remove_all(c.out_dir);
}

TEST(Experiment, deterministic_and_schedule_independent) {
    auto a = small_config("tieq_exp_det_a");
    auto b = small_config("tieq_exp_det_b");
    b.threads = 3;
    auto ra = run_experiment(a);
    auto rb = run_experiment(b);
    EXPECT_EQ(ra.config_hash, rb.config_hash);
    EXPECT_EQ(slurp(std::filesystem::path(a.out_dir) / "metrics.csv"),
              slurp(std::filesystem::path(b.out_dir) / "metrics.csv"));
    EXPECT_EQ(slurp(std::filesystem::path(a.out_dir) / "images/quantum_dz150_f2.csv"),
              slurp(std::filesystem::path(b.out_dir) / "images/quantum_dz150_f2.csv"));
    ASSERT_EQ(ra.rows.size(), 2u * 3 * 3);
    EXPECT_EQ(ra.rows[0].mode, "classical");
    EXPECT_EQ(ra.rows[3].mode, "quantum");
    EXPECT_EQ(ra.rows[6].mode, "multi_frame(5)");
    EXPECT_EQ(ra.rows[9].dz_um, 150.0);

    auto c = small_config("tieq_exp_det_c");
    c.seed = 2;
    auto rc = run_experiment(c);
    EXPECT_NE(ra.rows[0].pearson, rc.rows[0].pearson);
    for (auto *cfg : {&a, &b, &c}) {
        std::filesystem::remove_all(cfg->out_dir);
    }
}

TEST(Experiment, zero_gain_quantum_equals_classical) {
    auto c = small_config("tieq_exp_k0");
    c.k_factor = 0.0;
    c.modes = {Mode::parse("classical"), Mode::parse("quantum")};
    auto r = run_experiment(c);
    ASSERT_EQ(r.rows.size(), 2u * 2 * 3);
    for (size_t i = 0; i < r.rows.size(); i += 6) {
        for (int f = 0; f < 3; ++f) {
            const auto &cl = r.rows[i + f];
            const auto &qu = r.rows[i + 3 + f];
            EXPECT_EQ(cl.frame_seed, qu.frame_seed);
            EXPECT_EQ(cl.pearson, qu.pearson);
            EXPECT_EQ(cl.phase_step, qu.phase_step);
        }
    }
    std::filesystem::remove_all(c.out_dir);
}

TEST(Experiment, multi_frame_convergence) {
    auto c = small_config("tieq_exp_multi");
    c.dz_um = {200};
    c.frames_per_point = 8;
    c.images_per_point = 0;
    const std::vector<int> ns{1, 4, 16, 64};
    c.modes.clear();
    for (int n : ns) {
        c.modes.push_back(Mode{Mode::Kind::MultiFrame, n});
    }
    auto r = run_experiment(c);
    std::vector<double> x, y;
    std::map<int, double> mean;
    for (size_t m = 0; m < ns.size(); ++m) {
        for (int f = 0; f < 8; ++f) {
            double p = r.rows[m * 8 + f].pearson;
            x.push_back(ns[m]);
            y.push_back(p);
            mean[ns[m]] += p / 8;
        }
    }
    // Spearman rank correlation between N and Pearson (ties in N broken by order; still positive).
    auto rx = ranks(x), ry = ranks(y);
    double n = static_cast<double>(x.size()), d2 = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
    }
    double rho = 1 - 6 * d2 / (n * (n * n - 1));
    EXPECT_GT(rho, 0.5);
    for (size_t m = 1; m < ns.size(); ++m) {
        EXPECT_GE(mean[ns[m]], mean[ns[m - 1]]) << ns[m];
    }
    std::filesystem::remove_all(c.out_dir);
}

TEST(Experiment, calibration_perfect_twins) {
    ExperimentConfig c;
    c.eta_target.reset();
    c.source.eta0 = 1.0;
    c.source.sigma_corr_um = 0.0;
    c.source.read_noise_e = 0.0;
    auto rec = calibrate(c, 20);
    EXPECT_NEAR(rec.k_opt, 1.0, 0.01);
    EXPECT_NEAR(rec.noise_reduction, 0.0, 0.01);
    EXPECT_NEAR(rec.model_noise_reduction, 0.0, 1e-12);
}

TEST(Experiment, calibration_at_target_efficiency) {
    ExperimentConfig c;
    auto rec = calibrate(c, 100);
    EXPECT_NEAR(rec.model_noise_reduction, 1 - 0.57 * 0.57, 1e-9);
    EXPECT_NEAR(rec.noise_reduction, 0.675, 0.02);
    EXPECT_NEAR(rec.measured_eta, 0.57, 0.03);
    ASSERT_EQ(rec.alpha_by_dz.size(), c.dz_um.size());
    for (auto [dz, alpha] : rec.alpha_by_dz) {
        if (dz == 100) {
            EXPECT_GT(alpha, 1e-3);
            EXPECT_LT(alpha, 3e-2);
        }
    }
    EXPECT_THROW(calibrate(c, 1), ConfigError);
}

TEST(Experiment, noiseless_reconstruction) {
    ExperimentConfig c;
    ExperimentContext ctx(c);
    auto d50 = ctx.defocus_point(50);
    EXPECT_GT(d50.alpha, 1e-3);
    EXPECT_LT(d50.alpha, 1e-1);
    auto recon = [&](double dz) {
        auto p = ctx.defocus_point(dz);
        return ctx.reconstruct_classical(retag<CountsTag>(p.plus), retag<CountsTag>(p.minus), dz, 4);
    };
    EXPECT_NEAR(ctx.pearson_to_reference(recon(150)), 0.9, 0.06);
    for (double dz : {25.0, 50.0, 100.0}) {
        EXPECT_NEAR(ctx.phase_step(recon(dz)), 0.230, 0.03) << dz;
    }
}

TEST(Experiment, parallel_for_propagates_errors) {
    std::vector<int> hits(20, 0);
    parallel_for(20, 4, [&](int i) { hits[i]++; });
    EXPECT_EQ(std::count(hits.begin(), hits.end(), 1), 20);
    EXPECT_THROW(parallel_for(10, 3, [](int i) {
                     if (i == 7) {
                         throw NumericError("boom");
                     }
                 }),
                 NumericError);
}
