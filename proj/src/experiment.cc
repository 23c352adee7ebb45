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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <limits>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "tieq/errors.h"
#include "tieq/io.h"
#include "tieq/metrics.h"
#include "tieq/optics.h"
#include "tieq/rng.h"

namespace tieq {
namespace {

// Top-level stream families under the master seed.
constexpr std::uint64_t kSweepStream = 0;
constexpr std::uint64_t kCalibrationStream = 1;
constexpr std::uint64_t kFilterSweepStream = 2;

// Sub-streams of one frame seed, keyed {plane, purpose[, index]}.
constexpr std::uint64_t kTwinDraw = 0;
constexpr std::uint64_t kSignalReadNoise = 1;
constexpr std::uint64_t kIdlerReadNoise = 2;
constexpr std::uint64_t kAverageDraw = 3;
constexpr std::uint64_t kAverageReadNoise = 4;

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string format_dz(double dz) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", dz);
    return buf;
}

// File-name friendly mode label: multi_frame(100) -> multi_frame100.
std::string mode_slug(const Mode &mode) {
    std::string out;
    for (char c : mode.name()) {
        if (c != '(' && c != ')') {
            out.push_back(c);
        }
    }
    return out;
}

IntensityMap ensemble_mean(const std::vector<IntensityFrame> &frames) {
    IntensityMap out(frames.front().grid());
    auto dst = out.values();
    for (const auto &f : frames) {
        auto src = f.values();
        for (size_t i = 0; i < dst.size(); ++i) {
            dst[i] += src[i];
        }
    }
    for (double &v : dst) {
        v /= static_cast<double>(frames.size());
    }
    return out;
}

// Mean of `focus` over the bounding box of the pixels where `phase` differs from its corner value.
double support_mean(const PhaseMap &phase, const IntensityMap &focus) {
    const Grid &g = phase.grid();
    const double background = phase.at(0, 0);
    int x0 = g.nx(), y0 = g.ny(), x1 = -1, y1 = -1;
    for (int y = 0; y < g.ny(); ++y) {
        for (int x = 0; x < g.nx(); ++x) {
            if (phase.at(x, y) != background) {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x);
                y1 = std::max(y1, y);
            }
        }
    }
    if (x1 < 0) {
        return focus.mean();
    }
    double total = 0;
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            total += focus.at(x, y);
        }
    }
    return total / static_cast<double>((x1 - x0 + 1) * (y1 - y0 + 1));
}

struct PlaneSeeds {
    std::uint64_t twin;
    std::uint64_t signal_noise;
    std::uint64_t idler_noise;
};

PlaneSeeds plane_seeds(std::uint64_t frame_seed, std::uint64_t plane) {
    return {derive_seed(frame_seed, {plane, kTwinDraw}), derive_seed(frame_seed, {plane, kSignalReadNoise}),
            derive_seed(frame_seed, {plane, kIdlerReadNoise})};
}

}  // namespace

std::uint64_t sweep_frame_seed(std::uint64_t master, int dz_index, int frame_index) {
    return derive_seed(master, {kSweepStream, static_cast<std::uint64_t>(dz_index),
                                static_cast<std::uint64_t>(frame_index)});
}

void parallel_for(int count, int threads, const std::function<void(int)> &body) {
    if (count <= 0) {
        return;
    }
    threads = std::clamp(threads, 1, count);
    if (threads == 1) {
        for (int i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            int i = next.fetch_add(1);
            if (i >= count) {
                return;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    for (auto &t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

ExperimentContext::ExperimentContext(ExperimentConfig config)
    : config_(std::move(config)),
      reference_(config_.frame_grid()),
      illumination_(config_.sim_grid()),
      sim_phase_(config_.sim_grid()),
      focus_(config_.frame_grid()) {
    config_.validate();
    source_ = config_.resolved_source();
    const Grid frame = config_.frame_grid();
    const Grid sim = config_.sim_grid();
    const int guard = config_.guard_px;

    if (config_.sample_kind == SampleKind::CustomFile) {
        reference_ = load_phase_map(config_.sample_path, config_.pitch_um, config_.wavelength_um);
        if (reference_.grid().nx() != frame.nx() || reference_.grid().ny() != frame.ny()) {
            throw ConfigError("sample file " + config_.sample_path + " does not match the frame size");
        }
        reference_ = PhaseMap(frame, reference_.vector());
    } else {
        reference_ = make_sample(config_.sample_kind, config_.step_rad, frame);
    }
    rois_ = config_.rois ? config_.rois : default_step_rois(config_.sample_kind, frame);
    if (rois_) {
        rois_->inside.validate(frame);
        rois_->outside.validate(frame);
    }
    sim_phase_ = embed(reference_, guard, guard, sim.nx(), sim.ny());

    ComplexField unit = make_illumination(sim, config_.illumination, 1.0);
    double frame_mean = crop(unit.intensity(), guard, guard, frame.nx(), frame.ny()).mean();
    if (!(frame_mean > 0)) {
        throw ConfigError("illumination does not reach the camera frame");
    }
    const double amplitude = std::sqrt(source_.n_mean / frame_mean);
    illumination_ = unit;
    for (auto &v : illumination_.values()) {
        v *= amplitude;
    }
    focus_ = crop(illumination_.intensity(), guard, guard, frame.nx(), frame.ny());
    illum_mean_ = support_mean(reference_, focus_);
}

DefocusPoint ExperimentContext::defocus_point(double dz_um) const {
    const Grid frame = config_.frame_grid();
    const int guard = config_.guard_px;
    DefocusedIntensities d = defocused_intensities(illumination_, sim_phase_, dz_um);
    IntensityMap plus = crop(d.plus, guard, guard, frame.nx(), frame.ny());
    IntensityMap minus = crop(d.minus, guard, guard, frame.nx(), frame.ny());
    const double alpha = alpha_estimate(focus_, plus);
    return DefocusPoint{dz_um, std::move(plus), std::move(minus), alpha};
}

TwinFrameSet ExperimentContext::simulate_twins(const IntensityMap &mean_signal, std::uint64_t frame_seed,
                                             std::uint64_t plane) const {
    PlaneSeeds seeds = plane_seeds(frame_seed, plane);
    TwinFrameSet twin = sample_twin_frames(mean_signal, focus_, source_, seeds.twin);
    twin.signal = add_read_noise(twin.signal, source_.read_noise_e, seeds.signal_noise);
    twin.idler = add_read_noise(twin.idler, source_.read_noise_e, seeds.idler_noise);
    return twin;
}

FramePair ExperimentContext::simulate_pair(const DefocusPoint &point, std::uint64_t frame_seed) const {
    auto plane = [&](const IntensityMap &mean, std::uint64_t index) {
        TwinFrameSet twin = simulate_twins(mean, frame_seed, index);
        return PlaneFrames{std::move(twin.signal), twin.aligned_idler()};
    };
    return FramePair{plane(point.plus, 0), plane(point.minus, 1), frame_seed};
}

IntensityFrame ExperimentContext::simulate_average(const IntensityMap &mean, int frames, std::uint64_t seed) const {
    if (frames < 1) {
        throw ConfigError("simulate_average: frames must be >= 1");
    }
    // The sum of N independent Poisson(m) counts is Poisson(N m) and the sum of N read-noise
    // samples is Gaussian with sigma sqrt(N), so the N-frame total is drawn in one pass.
    IntensityMap total = mean;
    for (double &v : total.values()) {
        v *= frames;
    }
    IntensityFrame sum = add_read_noise(sample_signal_frame(total, derive_seed(seed, {kAverageDraw})),
                                        source_.read_noise_e * std::sqrt(static_cast<double>(frames)),
                                        derive_seed(seed, {kAverageReadNoise}));
    for (double &v : sum.values()) {
        v /= frames;
    }
    return sum;
}

CalibrationFrames ExperimentContext::calibration_frames(int count) const {
    if (count < 2) {
        throw ConfigError("calibration needs at least two frames");
    }
    CalibrationFrames out;
    out.signal.assign(count, IntensityFrame(focus_.grid()));
    out.idler.assign(count, IntensityFrame(focus_.grid()));
    parallel_for(count, config_.threads, [&](int i) {
        std::uint64_t seed = derive_seed(config_.seed, {kCalibrationStream, static_cast<std::uint64_t>(i)});
        TwinFrameSet twin = simulate_twins(focus_, seed, 0);
        out.signal[i] = std::move(twin.signal);
        out.idler[i] = twin.aligned_idler();
    });
    return out;
}

Calibration ExperimentContext::calibrate(const CalibrationFrames &frames, int filter_px) const {
    std::vector<IntensityFrame> signal;
    std::vector<IntensityFrame> idler;
    signal.reserve(frames.signal.size());
    idler.reserve(frames.idler.size());
    for (size_t i = 0; i < frames.signal.size(); ++i) {
        signal.push_back(averaging_filter(frames.signal[i], filter_px));
        idler.push_back(averaging_filter(frames.idler[i], filter_px));
    }
    KOptEstimate estimate = estimate_k_opt(signal, idler);

    Calibration cal{filter_px, config_.k_factor ? *config_.k_factor : std::clamp(estimate.scalar, 0.0, 1.0),
                    IntensityMap(focus_.grid()), ensemble_mean(idler), 1.0};
    if (config_.k_per_pixel && !config_.k_factor) {
        cal.k_map = estimate.per_pixel;
        for (double &v : cal.k_map.values()) {
            v = std::clamp(v, 0.0, 1.0);
        }
    } else {
        for (double &v : cal.k_map.values()) {
            v = cal.k_opt;
        }
    }

    IntensityMap signal_mean = ensemble_mean(signal);
    const size_t n = signal_mean.grid().size();
    auto sm = signal_mean.values();
    auto im = cal.idler_mean.values();
    auto km = cal.k_map.values();
    double var_raw = 0;
    double var_corrected = 0;
    for (size_t f = 0; f < signal.size(); ++f) {
        auto s = signal[f].values();
        auto id = idler[f].values();
        for (size_t i = 0; i < n; ++i) {
            double ds = s[i] - sm[i];
            double di = id[i] - im[i];
            var_raw += ds * ds;
            var_corrected += (ds - km[i] * di) * (ds - km[i] * di);
        }
    }
    cal.noise_reduction = var_raw > 0 ? var_corrected / var_raw : 1.0;
    return cal;
}

PhaseMap ExperimentContext::reconstruct_classical(const IntensityFrame &plus, const IntensityFrame &minus,
                                                  double dz_um, int filter_px) const {
    TieOptions options{dz_um, config_.frame_grid().wavenumber(), config_.regularization_eps, true, illum_mean_};
    return solve_tie(
        axial_derivative(averaging_filter(plus, filter_px), averaging_filter(minus, filter_px), dz_um), options);
}

PhaseMap ExperimentContext::reconstruct_quantum(const FramePair &pair, double dz_um,
                                                const Calibration &calibration) const {
    const int d = calibration.filter_px;
    auto corrected = [&](const PlaneFrames &plane) {
        IntensityFrame s = averaging_filter(plane.signal, d);
        IntensityFrame i = averaging_filter(plane.idler, d);
        if (config_.k_per_pixel && !config_.k_factor) {
            return quantum_subtract(s, i, calibration.idler_mean, calibration.k_map);
        }
        return quantum_subtract(s, i, calibration.idler_mean, QuantumCorrection{calibration.k_opt, true});
    };
    TieOptions options{dz_um, config_.frame_grid().wavenumber(), config_.regularization_eps, true, illum_mean_};
    return solve_tie(axial_derivative(corrected(pair.plus), corrected(pair.minus), dz_um), options);
}

double ExperimentContext::pearson_to_reference(const PhaseMap &phase) const {
    return pearson(phase, reference_, config_.border_px);
}

double ExperimentContext::phase_step(const PhaseMap &phase) const {
    if (!rois_) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return phase_step_estimate(phase, rois_->inside, rois_->outside);
}

std::string metrics_csv(const std::vector<MetricsRow> &rows) {
    std::string out = "dz_um,mode,frame_seed,pearson,phase_step_rad,alpha,k_opt\n";
    for (const auto &r : rows) {
        out += format_number(r.dz_um) + "," + r.mode + "," + std::to_string(r.frame_seed) + "," +
               format_number(r.pearson) + "," + format_number(r.phase_step) + "," + format_number(r.alpha) + "," +
               format_number(r.k_opt) + "\n";
    }
    return out;
}

std::string filter_sweep_csv(const std::vector<FilterSweepRow> &rows) {
    std::string out = "filter_px,mode,frame_seed,pearson,phase_step_rad,k_opt\n";
    for (const auto &r : rows) {
        out += std::to_string(r.filter_px) + "," + r.mode + "," + std::to_string(r.frame_seed) + "," +
               format_number(r.pearson) + "," + format_number(r.phase_step) + "," + format_number(r.k_opt) + "\n";
    }
    return out;
}

namespace {

CalibrationRecord make_record(const ExperimentContext &ctx, const Calibration &cal, double measured_eta, int frames,
                              const std::vector<DefocusPoint> &points) {
    const ExperimentConfig &config = ctx.config();
    const SourceModel &source = ctx.source();
    CalibrationRecord record;
    record.frames = frames;
    record.filter_px = cal.filter_px;
    record.k_opt = cal.k_opt;
    record.measured_eta = measured_eta;
    record.noise_reduction = cal.noise_reduction;
    double eta = heralding_efficiency(cal.filter_px * config.pitch_um, source.misalignment_um,
                                      source.sigma_corr_um, source.eta0);
    record.model_noise_reduction = 1.0 - eta * eta;
    for (const auto &p : points) {
        record.alpha_by_dz.emplace_back(p.dz_um, p.alpha);
    }
    return record;
}

double unforced_k(const ExperimentContext &ctx, const CalibrationFrames &frames, int filter_px) {
    if (!ctx.config().k_factor) {
        return ctx.calibrate(frames, filter_px).k_opt;
    }
    std::vector<IntensityFrame> s, i;
    for (size_t f = 0; f < frames.signal.size(); ++f) {
        s.push_back(averaging_filter(frames.signal[f], filter_px));
        i.push_back(averaging_filter(frames.idler[f], filter_px));
    }
    return estimate_k_opt(s, i).scalar;
}

}  // namespace

nlohmann::json to_json(const CalibrationRecord &r) {
    nlohmann::json alpha = nlohmann::json::array();
    for (auto [dz, a] : r.alpha_by_dz) {
        alpha.push_back({{"dz_um", dz}, {"alpha", a}});
    }
    return {{"frames", r.frames},
            {"filter_px", r.filter_px},
            {"k_opt", r.k_opt},
            {"measured_eta", r.measured_eta},
            {"noise_reduction", r.noise_reduction},
            {"model_noise_reduction", r.model_noise_reduction},
            {"alpha_by_dz", alpha}};
}


CalibrationRecord calibrate(const ExperimentConfig &config, int n_frames) {
    if (n_frames < 2) {
        throw ConfigError("calibrate: n_frames must be >= 2");
    }
    ExperimentContext ctx(config);
    CalibrationFrames frames = ctx.calibration_frames(n_frames);
    Calibration cal = ctx.calibrate(frames, config.filter_size_px);
    std::vector<DefocusPoint> points;
    for (double dz : config.dz_um) {
        points.push_back(ctx.defocus_point(dz));
    }
    return make_record(ctx, cal, unforced_k(ctx, frames, config.filter_size_px), n_frames, points);
}

RunReport run_experiment(const ExperimentConfig &config) {
    ExperimentContext ctx(config);
    const std::filesystem::path out_dir = config.out_dir;
    std::filesystem::create_directories(out_dir / "images");

    const int n_dz = static_cast<int>(config.dz_um.size());
    const int frames = config.frames_per_point;
    const int n_modes = static_cast<int>(config.modes.size());
    const bool needs_twins = std::any_of(config.modes.begin(), config.modes.end(),
                                         [](const Mode &m) { return m.kind != Mode::Kind::MultiFrame; });
    const bool needs_calibration =
        std::any_of(config.modes.begin(), config.modes.end(),
                    [](const Mode &m) { return m.kind == Mode::Kind::Quantum; }) ||
        !config.filter_sweep_px.empty();

    std::vector<std::optional<DefocusPoint>> computed(n_dz);
    parallel_for(n_dz, config.threads, [&](int i) { computed[i] = ctx.defocus_point(config.dz_um[i]); });
    std::vector<DefocusPoint> points;
    for (auto &p : computed) {
        points.push_back(std::move(*p));
    }

    CalibrationFrames cal_frames;
    std::optional<Calibration> cal;
    CalibrationRecord record;
    if (needs_calibration) {
        cal_frames = ctx.calibration_frames(config.calibration_frames);
        cal = ctx.calibrate(cal_frames, config.filter_size_px);
        record = make_record(ctx, *cal, unforced_k(ctx, cal_frames, config.filter_size_px),
                             config.calibration_frames, points);
    } else {
        for (const auto &p : points) {
            record.alpha_by_dz.emplace_back(p.dz_um, p.alpha);
        }
        record.filter_px = config.filter_size_px;
    }

    auto image_name = [](const std::string &stem, int frame) {
        return "images/" + stem + "_f" + std::to_string(frame);
    };
    auto save_phase = [&](const PhaseMap &phase, const std::string &relative) {
        write_pgm(phase, out_dir / (relative + ".pgm"));
        write_csv(phase, out_dir / (relative + ".csv"));
    };

    // One task per (dz, frame); each fills the n_modes rows of its slot.
    std::vector<MetricsRow> slots(static_cast<size_t>(n_dz) * frames * n_modes);
    parallel_for(n_dz * frames, config.threads, [&](int task) {
        const int dz_index = task / frames;
        const int frame = task % frames;
        const DefocusPoint &point = points[dz_index];
        const std::uint64_t seed = sweep_frame_seed(config.seed, dz_index, frame);
        std::optional<FramePair> pair;
        if (needs_twins) {
            pair = ctx.simulate_pair(point, seed);
        }
        for (int m = 0; m < n_modes; ++m) {
            const Mode &mode = config.modes[m];
            PhaseMap phase(config.frame_grid());
            double k = 0.0;
            switch (mode.kind) {
                case Mode::Kind::Classical:
                    phase = ctx.reconstruct_classical(pair->plus.signal, pair->minus.signal, point.dz_um,
                                                      config.filter_size_px);
                    break;
                case Mode::Kind::Quantum:
                    phase = ctx.reconstruct_quantum(*pair, point.dz_um, *cal);
                    k = cal->k_opt;
                    break;
                case Mode::Kind::MultiFrame: {
                    IntensityFrame plus = ctx.simulate_average(point.plus, mode.frames, derive_seed(seed, {0}));
                    IntensityFrame minus = ctx.simulate_average(point.minus, mode.frames, derive_seed(seed, {1}));
                    phase = ctx.reconstruct_classical(plus, minus, point.dz_um, config.filter_size_px);
                    break;
                }
            }
            MetricsRow &row = slots[(static_cast<size_t>(dz_index) * n_modes + m) * frames + frame];
            row = {point.dz_um, mode.name(), seed, ctx.pearson_to_reference(phase), ctx.phase_step(phase),
                   point.alpha, k};
            if (frame < config.images_per_point) {
                save_phase(phase, image_name(mode_slug(mode) + "_dz" + format_dz(point.dz_um), frame));
            }
        }
    });

    RunReport report;
    report.rows = std::move(slots);
    report.seed = config.seed;
    report.code_version = kCodeVersion;
    report.config_hash = config_hash(config);

    save_phase(ctx.reference(), "images/reference");
    report.files.push_back("images/reference.pgm");
    report.files.push_back("images/reference.csv");
    for (int i = 0; i < n_dz; ++i) {
        for (const Mode &mode : config.modes) {
            for (int f = 0; f < std::min(frames, config.images_per_point); ++f) {
                std::string stem = image_name(mode_slug(mode) + "_dz" + format_dz(config.dz_um[i]), f);
                report.files.push_back(stem + ".pgm");
                report.files.push_back(stem + ".csv");
            }
        }
    }

    if (!config.filter_sweep_px.empty()) {
        const DefocusPoint point = ctx.defocus_point(config.filter_sweep_dz_um);
        const int n_d = static_cast<int>(config.filter_sweep_px.size());
        std::vector<std::optional<Calibration>> cals(n_d);
        parallel_for(n_d, config.threads,
                     [&](int i) { cals[i] = ctx.calibrate(cal_frames, config.filter_sweep_px[i]); });
        std::vector<FilterSweepRow> slots_d(static_cast<size_t>(n_d) * 2 * frames);
        parallel_for(frames, config.threads, [&](int frame) {
            const std::uint64_t seed = derive_seed(config.seed, {kFilterSweepStream, static_cast<std::uint64_t>(frame)});
            FramePair pair = ctx.simulate_pair(point, seed);
            for (int i = 0; i < n_d; ++i) {
                const int d = config.filter_sweep_px[i];
                PhaseMap classical = ctx.reconstruct_classical(pair.plus.signal, pair.minus.signal, point.dz_um, d);
                PhaseMap quantum = ctx.reconstruct_quantum(pair, point.dz_um, *cals[i]);
                slots_d[(static_cast<size_t>(i) * 2 + 0) * frames + frame] = {
                    d, "classical", seed, ctx.pearson_to_reference(classical), ctx.phase_step(classical), 0.0};
                slots_d[(static_cast<size_t>(i) * 2 + 1) * frames + frame] = {
                    d, "quantum", seed, ctx.pearson_to_reference(quantum), ctx.phase_step(quantum), cals[i]->k_opt};
            }
        });
        report.filter_rows = std::move(slots_d);
        write_text_file(out_dir / "filter_sweep.csv", filter_sweep_csv(report.filter_rows));
        report.files.push_back("filter_sweep.csv");
    }

    report.calibration = record;
    write_text_file(out_dir / "metrics.csv", metrics_csv(report.rows));
    report.files.push_back("metrics.csv");
    report.files.push_back("manifest.json");

    nlohmann::json manifest;
    manifest["code_version"] = report.code_version;
    manifest["config_hash"] = report.config_hash;
    manifest["seed"] = report.seed;
    manifest["config"] = to_json(config);
    manifest["sample_version"] = sample_version(config.sample_kind);
    manifest["illum_mean"] = ctx.illum_mean();
    manifest["eta0"] = ctx.source().eta0;
    manifest["calibration"] = to_json(record);
    manifest["files"] = report.files;
    write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
    return report;
}

}  // namespace tieq
