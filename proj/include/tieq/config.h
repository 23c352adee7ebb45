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

#ifndef TIEQ_CONFIG_H
#define TIEQ_CONFIG_H

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tieq/grid.h"
#include "tieq/optics.h"
#include "tieq/photon_stats.h"
#include "tieq/samples.h"

namespace tieq {

inline constexpr const char *kCodeVersion = "0.1.0";

/// Processing path for one column of the sweep.
struct Mode {
    enum class Kind { Classical, Quantum, MultiFrame };
    Kind kind = Kind::Classical;
    /// Frames averaged per plane before reconstruction (MultiFrame only).
    int frames = 1;

    /// "classical", "quantum" or "multi_frame(N)".
    std::string name() const;
    static Mode parse(const std::string &text);
    bool operator==(const Mode &) const = default;
};

/// Full description of a run. Serialized as one JSON document whose physical quantities
/// carry unit suffixes in their keys (dz_um, pitch_um, ...).
struct ExperimentConfig {
    // Camera frame (object-plane pixels).
    int nx = 80;
    int ny = 80;
    double pitch_um = 5.0;
    double wavelength_um = 0.81;
    /// Extra pixels on every side of the frame for the optical simulation.
    int guard_px = 40;

    IlluminationSpec illumination{IlluminationSpec::Profile::Gaussian, 2000.0, 250.0, 120.0};

    SampleKind sample_kind = SampleKind::PiGlyph;
    double step_rad = 0.230;
    std::string sample_path;
    std::optional<StepRois> rois;

    SourceModel source{1000.0, 1.0, 2.123, {0.0, 0.0}, 4.0};
    /// When set, eta0 is derived so that heralding_efficiency at a pixel of
    /// eta_target_filter_px * pitch equals this value; otherwise source.eta0 is used as is.
    std::optional<double> eta_target = 0.57;
    int eta_target_filter_px = 4;

    std::vector<double> dz_um{25, 50, 75, 100, 150, 200, 300, 400, 500};
    int frames_per_point = 100;
    int filter_size_px = 4;
    std::vector<Mode> modes{{Mode::Kind::Classical, 1}, {Mode::Kind::Quantum, 1}, {Mode::Kind::MultiFrame, 100}};

    /// Optional averaging-filter sweep at a single defocus.
    std::vector<int> filter_sweep_px;
    double filter_sweep_dz_um = 100.0;

    std::uint64_t seed = 1;
    std::string out_dir = "run";
    int threads = 1;

    int calibration_frames = 100;
    /// Forces the subtraction gain instead of calibrating it.
    std::optional<double> k_factor;
    bool k_per_pixel = false;

    double regularization_eps = 0.0;
    int border_px = 4;
    int images_per_point = 1;

    /// Throws ConfigError (or AliasingError for dz beyond the sampling bound).
    void validate() const;

    Grid frame_grid() const;
    Grid sim_grid() const;
    /// Source model with eta0 resolved from eta_target when that is set.
    SourceModel resolved_source() const;
};

nlohmann::json to_json(const ExperimentConfig &config);
ExperimentConfig config_from_json(const nlohmann::json &json);
ExperimentConfig load_config(const std::filesystem::path &path);

/// FNV-1a hash of the canonical (key-sorted) JSON of everything that affects results;
/// out_dir and threads are excluded.
std::string config_hash(const ExperimentConfig &config);

nlohmann::json grid_to_json(const Grid &grid);
Grid grid_from_json(const nlohmann::json &json);
nlohmann::json source_to_json(const SourceModel &source);
SourceModel source_from_json(const nlohmann::json &json);

}  // namespace tieq

#endif
