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

#include "tieq/io.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "tieq/errors.h"
#include "tieq/rng.h"

using namespace tieq;

namespace {

std::filesystem::path scratch(const char *name) {
    auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    return dir;
}

IntensityFrame noisy_frame(const Grid &g) {
    auto rng = make_rng(8);
    std::normal_distribution<double> n(500.0, 40.0);
    IntensityFrame f(g);
    for (auto &v : f.values()) {
        v = n(rng);
    }
    return f;
}

}  // namespace

TEST(Io, csv_is_lossless) {
    auto dir = scratch("tieq_io_csv");
    Grid g(10, 8, 2.5, 0.6);
    auto f = noisy_frame(g);
    f.at(3, 2) = -1.0 / 3.0;
    write_csv(f, dir / "f.csv");
    EXPECT_EQ(read_csv<CountsTag>(dir / "f.csv", 2.5, 0.6), f);
    std::filesystem::remove_all(dir);
}

TEST(Io, pgm_quantization_and_metadata) {
    auto dir = scratch("tieq_io_pgm");
    Grid g(12, 10, 2.5, 0.6);
    auto f = noisy_frame(g);
    write_pgm(f, dir / "f.pgm");
    auto back = read_pgm<CountsTag>(dir / "f.pgm");
    EXPECT_EQ(back.grid(), g);
    double lo = *std::min_element(f.values().begin(), f.values().end());
    double hi = *std::max_element(f.values().begin(), f.values().end());
    for (size_t i = 0; i < g.size(); ++i) {
        EXPECT_NEAR(back.values()[i], f.values()[i], 0.5 * (hi - lo) / 65535 + 1e-9);
    }

    IntensityFrame flat(g);
    for (auto &v : flat.values()) {
        v = 7.0;
    }
    write_pgm(flat, dir / "flat.pgm");
    EXPECT_EQ(read_pgm<CountsTag>(dir / "flat.pgm"), flat);
    std::filesystem::remove_all(dir);
}

TEST(Io, plain_pgm_uses_fallback_grid) {
    auto dir = scratch("tieq_io_plain");
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "p.pgm", std::ios::binary);
        out << "P5\n8 8\n255\n";
        for (int i = 0; i < 64; ++i) {
            out.put(static_cast<char>(i));
        }
    }
    auto m = read_pgm<PhaseTag>(dir / "p.pgm", 3.0, 0.5);
    EXPECT_EQ(m.grid(), Grid(8, 8, 3.0, 0.5));
    EXPECT_EQ(m.at(7, 7), 63.0);
    {
        std::ofstream out(dir / "short.pgm", std::ios::binary);
        out << "P5\n8 8\n255\nabc";
    }
    EXPECT_THROW(read_pgm<PhaseTag>(dir / "short.pgm"), ConfigError);
    EXPECT_THROW(read_pgm<PhaseTag>(dir / "missing.pgm"), std::runtime_error);
    std::filesystem::remove_all(dir);
}

TEST(Io, malformed_csv) {
    auto dir = scratch("tieq_io_bad_csv");
    write_text_file(dir / "ragged.csv", "1,2,3,4,5,6,7,8\n1,2\n");
    EXPECT_THROW(read_csv<PhaseTag>(dir / "ragged.csv", 5.0, 0.81), ConfigError);
    write_text_file(dir / "word.csv", "1,2,x,4,5,6,7,8\n");
    EXPECT_THROW(read_csv<PhaseTag>(dir / "word.csv", 5.0, 0.81), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST(Io, twin_bundle_round_trip) {
    auto dir = scratch("tieq_io_bundle");
    Grid g(8, 10, 5.0, 0.81);
    IntensityMap mean(g);
    for (auto &v : mean.values()) {
        v = 300.0;
    }
    SourceModel src{300.0, 0.8, 2.0, {0.5, -1.0}, 4.0};
    auto set = sample_twin_frames(mean, mean, src, 1234567890123ull);
    write_twin_bundle(set, src, dir);
    auto back = read_twin_bundle(dir);
    EXPECT_EQ(back.frames.signal, set.signal);
    EXPECT_EQ(back.frames.idler, set.idler);
    EXPECT_EQ(back.frames.mean_signal, set.mean_signal);
    EXPECT_EQ(back.frames.mean_idler, set.mean_idler);
    EXPECT_EQ(back.frames.seed, set.seed);
    EXPECT_EQ(back.source.eta0, src.eta0);
    EXPECT_EQ(back.source.misalignment_um, src.misalignment_um);
    EXPECT_EQ(back.source.read_noise_e, src.read_noise_e);
    std::filesystem::remove_all(dir);
}
