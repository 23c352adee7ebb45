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

#ifndef TIEQ_EXPERIMENT_H
#define TIEQ_EXPERIMENT_H

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tieq/config.h"
#include "tieq/grid.h"
#include "tieq/photon_stats.h"
#include "tieq/samples.h"
#include "tieq/tie_solver.h"

namespace tieq {

/// Noiseless defocused intensities on the camera frame.
struct DefocusPoint {
    double dz_um = 0.0;
    IntensityMap plus;
    IntensityMap minus;
    /// alpha_estimate(I0, I(+dz)).
    double alpha = 0.0;
};

/// Detected frames of one plane, read noise included, idler flipped into signal coordinates.
struct PlaneFrames {
    IntensityFrame signal;
    IntensityFrame idler;
};

struct FramePair {
    PlaneFrames plus;
    PlaneFrames minus;
    std::uint64_t frame_seed = 0;
};

/// Object-free twin frames used to calibrate the subtraction.
struct CalibrationFrames {
    std::vector<IntensityFrame> signal;
    std::vector<IntensityFrame> idler;
};

struct Calibration {
    int filter_px = 1;
    /// Scalar k_opt from estimate_k_opt, or the forced value.
    double k_opt = 0.0;
    IntensityMap k_map;
    /// Ensemble mean of the filtered, aligned idler frames.
    IntensityMap idler_mean;
    /// Spatially averaged var(I_s - k dI_i) / var(I_s) at k = k_opt, filtered frames.
    double noise_reduction = 1.0;
};

struct CalibrationRecord {
    int frames = 0;
    int filter_px = 1;
    double k_opt = 0.0;
    /// Equals k_opt for object-free calibration.
    double measured_eta = 0.0;
    double noise_reduction = 1.0;
    /// 1 - eta^2 with eta = heralding_efficiency at the filter size.
    double model_noise_reduction = 1.0;
    std::vector<std::pair<double, double>> alpha_by_dz;
};

/// Everything a sweep needs that does not depend on the random draw: the reference sample,
/// illumination, noiseless intensities and the resolved source model. Immutable after
/// construction and safe to share across worker threads.
class ExperimentContext {
   public:
    /// Validates the config; throws ConfigError / AliasingError.
    explicit ExperimentContext(ExperimentConfig config);

    const ExperimentConfig &config() const {
        return config_;
    }
    const SourceModel &source() const {
        return source_;
    }
    const PhaseMap &reference() const {
        return reference_;
    }
    /// In-focus intensity on the frame.
    const IntensityMap &focus() const {
        return focus_;
    }
    /// I0 handed to the solver: mean in-focus intensity over the object's bounding box.
    double illum_mean() const {
        return illum_mean_;
    }
    const std::optional<StepRois> &rois() const {
        return rois_;
    }

    DefocusPoint defocus_point(double dz_um) const;

    /// One twin exposure with read noise on both arms. The idler stays in its own
    /// (point-reflected) geometry. `plane` selects the sub-stream of `frame_seed`.
    TwinFrameSet simulate_twins(const IntensityMap &mean_signal, std::uint64_t frame_seed,
                                std::uint64_t plane) const;

    /// One twin exposure per plane; the idler arm sees the unperturbed I0.
    FramePair simulate_pair(const DefocusPoint &point, std::uint64_t frame_seed) const;

    /// Average of `frames` independent signal-only exposures (read noise included).
    IntensityFrame simulate_average(const IntensityMap &mean, int frames, std::uint64_t seed) const;

    CalibrationFrames calibration_frames(int count) const;

    /// Calibrates at filter size d. A forced gain (config.k_factor) overrides k_opt.
    Calibration calibrate(const CalibrationFrames &frames, int filter_px) const;

    /// Classical path: filter both planes, finite difference, TIE.
    PhaseMap reconstruct_classical(const IntensityFrame &plus, const IntensityFrame &minus, double dz_um,
                                   int filter_px) const;

    /// Quantum path: filter, subtract k * (idler - idler_mean) in each plane, finite difference, TIE.
    PhaseMap reconstruct_quantum(const FramePair &pair, double dz_um, const Calibration &calibration) const;

    double pearson_to_reference(const PhaseMap &phase) const;
    /// NaN when no ROIs are defined.
    double phase_step(const PhaseMap &phase) const;

   private:
    ExperimentConfig config_;
    SourceModel source_;
    PhaseMap reference_;
    std::optional<StepRois> rois_;
    ComplexField illumination_;
    PhaseMap sim_phase_;
    IntensityMap focus_;
    double illum_mean_ = 0.0;
};

struct MetricsRow {
    double dz_um = 0.0;
    std::string mode;
    std::uint64_t frame_seed = 0;
    double pearson = 0.0;
    double phase_step = 0.0;
    double alpha = 0.0;
    double k_opt = 0.0;
};

struct FilterSweepRow {
    int filter_px = 1;
    std::string mode;
    std::uint64_t frame_seed = 0;
    double pearson = 0.0;
    double phase_step = 0.0;
    double k_opt = 0.0;
};

struct RunReport {
    /// Ordered by (dz, mode, frame index).
    std::vector<MetricsRow> rows;
    /// Ordered by (filter size, mode, frame index).
    std::vector<FilterSweepRow> filter_rows;
    CalibrationRecord calibration;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string code_version;
    /// Paths relative to the output directory.
    std::vector<std::string> files;
};

/// Runs the full sweep and writes manifest.json, metrics.csv (plus filter_sweep.csv when a
/// filter sweep is configured) and images/ under config.out_dir. Work items run on
/// config.threads workers; output order and content do not depend on scheduling.
RunReport run_experiment(const ExperimentConfig &config);

/// Object-free calibration: k_opt, measured eta and noise reduction at config.filter_size_px,
/// plus alpha for every configured dz.
CalibrationRecord calibrate(const ExperimentConfig &config, int n_frames);

nlohmann::json to_json(const CalibrationRecord &record);

std::string metrics_csv(const std::vector<MetricsRow> &rows);
std::string filter_sweep_csv(const std::vector<FilterSweepRow> &rows);

/// Runs body(0..count-1) on `threads` workers. Exceptions are rethrown on the caller.
void parallel_for(int count, int threads, const std::function<void(int)> &body);

/// Stream key of frame `frame_index` at sweep point `dz_index`.
std::uint64_t sweep_frame_seed(std::uint64_t master, int dz_index, int frame_index);

}  // namespace tieq

#endif
