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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tieq/config.h"
#include "tieq/errors.h"
#include "tieq/experiment.h"
#include "tieq/io.h"
#include "tieq/metrics.h"

namespace {

using tieq::ExperimentConfig;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 1;

// Command-line values that override the loaded config when given.
struct Overrides {
    std::string config_path;
    std::vector<std::function<void(ExperimentConfig &)>> setters;

    template <typename T>
    CLI::Option *add(CLI::App &app, const std::string &flag, const std::string &help,
                     std::function<void(ExperimentConfig &, const T &)> apply) {
        auto value = std::make_shared<T>();
        CLI::Option *opt = app.add_option(flag, *value, help);
        setters.push_back([opt, value, apply](ExperimentConfig &c) {
            if (opt->count() > 0) {
                apply(c, *value);
            }
        });
        return opt;
    }

    ExperimentConfig resolve() const {
        ExperimentConfig config = config_path.empty() ? ExperimentConfig{} : tieq::load_config(config_path);
        for (const auto &set : setters) {
            set(config);
        }
        config.validate();
        return config;
    }
};

void add_config_flags(CLI::App &app, Overrides &o) {
    app.add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
    o.add<int>(app, "--nx", "Frame width (px)", [](auto &c, int v) { c.nx = v; });
    o.add<int>(app, "--ny", "Frame height (px)", [](auto &c, int v) { c.ny = v; });
    o.add<double>(app, "--pitch-um", "Pixel pitch in the object plane", [](auto &c, double v) { c.pitch_um = v; });
    o.add<double>(app, "--wavelength-um", "Wavelength", [](auto &c, double v) { c.wavelength_um = v; });
    o.add<int>(app, "--guard-px", "Simulation guard band per side", [](auto &c, int v) { c.guard_px = v; });
    o.add<std::string>(app, "--sample", "pi_glyph | squares | custom-file",
                       [](auto &c, const std::string &v) { c.sample_kind = tieq::parse_sample_kind(v); });
    o.add<double>(app, "--step-rad", "Phase step of the sample", [](auto &c, double v) { c.step_rad = v; });
    o.add<std::string>(app, "--sample-path", "Phase map for custom-file (.pgm or .csv)",
                       [](auto &c, const std::string &v) {
                           c.sample_path = v;
                           c.sample_kind = tieq::SampleKind::CustomFile;
                       });
    o.add<double>(app, "--n-mean", "Mean photons per pixel", [](auto &c, double v) { c.source.n_mean = v; });
    o.add<double>(app, "--eta0", "Detection efficiency (disables --eta-target)", [](auto &c, double v) {
        c.source.eta0 = v;
        c.eta_target.reset();
    });
    o.add<double>(app, "--eta-target", "Heralding efficiency at the target filter size",
                  [](auto &c, double v) { c.eta_target = v; });
    o.add<double>(app, "--sigma-corr-um", "Twin-photon position spread",
                  [](auto &c, double v) { c.source.sigma_corr_um = v; });
    o.add<std::vector<double>>(app, "--misalignment-um", "Idler misalignment (dx dy)",
                               [](auto &c, const std::vector<double> &v) {
                                   if (v.size() != 2) {
                                       throw tieq::ConfigError("--misalignment-um takes two values");
                                   }
                                   c.source.misalignment_um = {v[0], v[1]};
                               });
    o.add<double>(app, "--read-noise-e", "Camera read noise", [](auto &c, double v) { c.source.read_noise_e = v; });
    o.add<std::vector<double>>(app, "--dz-um", "Defocus distances",
                               [](auto &c, const std::vector<double> &v) { c.dz_um = v; });
    o.add<int>(app, "--frames", "Frames per sweep point", [](auto &c, int v) { c.frames_per_point = v; });
    o.add<int>(app, "--filter-size", "Averaging filter size d (px)", [](auto &c, int v) { c.filter_size_px = v; });
    o.add<std::vector<std::string>>(app, "--modes", "classical quantum multi_frame(N)",
                                    [](auto &c, const std::vector<std::string> &v) {
                                        c.modes.clear();
                                        for (const auto &m : v) {
                                            c.modes.push_back(tieq::Mode::parse(m));
                                        }
                                    });
    o.add<std::vector<int>>(app, "--filter-sweep-px", "Filter sizes for the filter sweep",
                            [](auto &c, const std::vector<int> &v) { c.filter_sweep_px = v; });
    o.add<double>(app, "--filter-sweep-dz-um", "Defocus of the filter sweep",
                  [](auto &c, double v) { c.filter_sweep_dz_um = v; });
    o.add<int>(app, "--calibration-frames", "Object-free frames for k calibration",
               [](auto &c, int v) { c.calibration_frames = v; });
    o.add<double>(app, "--k-factor", "Force the subtraction gain", [](auto &c, double v) { c.k_factor = v; });
    o.add<bool>(app, "--k-per-pixel", "Use the per-pixel gain map", [](auto &c, bool v) { c.k_per_pixel = v; });
    o.add<double>(app, "--regularization-eps", "Tikhonov weight in units of the lowest frequency",
                  [](auto &c, double v) { c.regularization_eps = v; });
    o.add<int>(app, "--images-per-point", "Phase images written per (dz, mode)",
               [](auto &c, int v) { c.images_per_point = v; });
    o.add<std::uint64_t>(app, "--seed", "Master seed", [](auto &c, std::uint64_t v) { c.seed = v; });
    o.add<std::string>(app, "--out-dir", "Output directory", [](auto &c, const std::string &v) { c.out_dir = v; });
    o.add<int>(app, "--threads", "Worker threads", [](auto &c, int v) { c.threads = v; });
}

void print_summary(const tieq::RunReport &report) {
    std::map<std::pair<double, std::string>, std::vector<double>> pearson;
    std::map<std::pair<double, std::string>, std::vector<double>> step;
    std::vector<std::pair<double, std::string>> order;
    for (const auto &row : report.rows) {
        auto key = std::make_pair(row.dz_um, row.mode);
        if (!pearson.count(key)) {
            order.push_back(key);
        }
        pearson[key].push_back(row.pearson);
        if (std::isfinite(row.phase_step)) {
            step[key].push_back(row.phase_step);
        }
    }
    std::printf("%8s  %-18s %10s %10s %10s %10s\n", "dz_um", "mode", "pearson", "+/-", "step_rad", "std");
    for (const auto &key : order) {
        const auto &values = pearson[key];
        tieq::EnsembleStats p{values.front(), NAN, 1, NAN};
        if (values.size() >= 2) {
            p = tieq::ensemble_stats(values);
        }
        double s_mean = NAN, s_std = NAN;
        if (step[key].size() >= 2) {
            auto s = tieq::ensemble_stats(step[key]);
            s_mean = s.mean;
            s_std = s.std_dev;
        }
        std::printf("%8g  %-18s %10.5f %10.5f %10.5f %10.5f\n", key.first, key.second.c_str(), p.mean, p.std_error,
                    s_mean, s_std);
    }
    std::printf("config_hash %s  seed %llu  k_opt %.5f\n", report.config_hash.c_str(),
                static_cast<unsigned long long>(report.seed), report.calibration.k_opt);
}

int run(int argc, char **argv) {
    CLI::App app{"Quantum-enhanced transport-of-intensity phase imaging simulator"};
    app.require_subcommand(1);

    Overrides sweep_o, calibrate_o, sample_o, simulate_o, reconstruct_o;

    CLI::App *sweep = app.add_subcommand("sweep", "Run the full defocus (and optional filter) sweep");
    add_config_flags(*sweep, sweep_o);

    CLI::App *cal = app.add_subcommand("calibrate", "Object-free calibration of the subtraction gain");
    add_config_flags(*cal, calibrate_o);
    int cal_frames = 100;
    cal->add_option("--calibrate-frames", cal_frames, "Number of calibration frames");

    CLI::App *sample = app.add_subcommand("sample", "Write the reference phase map");
    add_config_flags(*sample, sample_o);

    CLI::App *simulate = app.add_subcommand("simulate", "Emit twin-frame bundles for one defocus");
    add_config_flags(*simulate, simulate_o);
    int sim_frames = 1;
    simulate->add_option("--count", sim_frames, "Number of exposures per plane");

    CLI::App *reconstruct = app.add_subcommand("reconstruct", "Reconstruct a phase map from two twin bundles");
    add_config_flags(*reconstruct, reconstruct_o);
    std::string plus_dir, minus_dir, mode_name = "classical";
    double rec_dz = 0;
    reconstruct->add_option("--plus", plus_dir, "Bundle recorded at +dz")->required()->check(CLI::ExistingDirectory);
    reconstruct->add_option("--minus", minus_dir, "Bundle recorded at -dz")->required()->check(CLI::ExistingDirectory);
    reconstruct->add_option("--defocus-um", rec_dz, "Defocus of the bundles")->required();
    reconstruct->add_option("--mode", mode_name, "classical | quantum");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    if (*sweep) {
        tieq::RunReport report = tieq::run_experiment(sweep_o.resolve());
        print_summary(report);
        return 0;
    }
    if (*cal) {
        ExperimentConfig config = calibrate_o.resolve();
        std::cout << tieq::to_json(tieq::calibrate(config, cal_frames)).dump(2) << "\n";
        return 0;
    }
    if (*sample) {
        ExperimentConfig config = sample_o.resolve();
        tieq::ExperimentContext ctx(config);
        std::filesystem::path out = config.out_dir;
        tieq::write_pgm(ctx.reference(), out / "sample.pgm");
        tieq::write_csv(ctx.reference(), out / "sample.csv");
        std::printf("%s version=%s\n", (out / "sample.pgm").string().c_str(),
                    tieq::sample_version(config.sample_kind).c_str());
        return 0;
    }
    if (*simulate) {
        ExperimentConfig config = simulate_o.resolve();
        tieq::ExperimentContext ctx(config);
        std::filesystem::path out = config.out_dir;
        for (size_t i = 0; i < config.dz_um.size(); ++i) {
            tieq::DefocusPoint point = ctx.defocus_point(config.dz_um[i]);
            for (int f = 0; f < sim_frames; ++f) {
                std::uint64_t seed = tieq::sweep_frame_seed(config.seed, static_cast<int>(i), f);
                char name[64];
                std::snprintf(name, sizeof(name), "dz%g_f%d", config.dz_um[i], f);
                tieq::write_twin_bundle(ctx.simulate_twins(point.plus, seed, 0), ctx.source(),
                                        out / name / "plus");
                tieq::write_twin_bundle(ctx.simulate_twins(point.minus, seed, 1), ctx.source(),
                                        out / name / "minus");
                std::printf("%s\n", (out / name).string().c_str());
            }
        }
        return 0;
    }
    if (*reconstruct) {
        ExperimentConfig config = reconstruct_o.resolve();
        tieq::ExperimentContext ctx(config);
        tieq::TwinBundle plus = tieq::read_twin_bundle(plus_dir);
        tieq::TwinBundle minus = tieq::read_twin_bundle(minus_dir);
        tieq::Mode mode = tieq::Mode::parse(mode_name);
        tieq::PhaseMap phase(config.frame_grid());
        if (mode.kind == tieq::Mode::Kind::Quantum) {
            tieq::Calibration calibration =
                ctx.calibrate(ctx.calibration_frames(config.calibration_frames), config.filter_size_px);
            tieq::FramePair pair{{plus.frames.signal, plus.frames.aligned_idler()},
                                 {minus.frames.signal, minus.frames.aligned_idler()},
                                 plus.frames.seed};
            phase = ctx.reconstruct_quantum(pair, rec_dz, calibration);
        } else if (mode.kind == tieq::Mode::Kind::Classical) {
            phase = ctx.reconstruct_classical(plus.frames.signal, minus.frames.signal, rec_dz, config.filter_size_px);
        } else {
            throw tieq::ConfigError("reconstruct supports classical and quantum modes");
        }
        std::filesystem::path out = config.out_dir;
        tieq::write_pgm(phase, out / "phase.pgm");
        tieq::write_csv(phase, out / "phase.csv");
        std::printf("pearson %.6f  phase_step_rad %.6f\n", ctx.pearson_to_reference(phase), ctx.phase_step(phase));
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    try {
        return run(argc, argv);
    } catch (const tieq::ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nlohmann::json::exception &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const tieq::NumericError &e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
}
