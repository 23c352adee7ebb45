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

#ifndef TIEQ_IO_H
#define TIEQ_IO_H

#include <filesystem>
#include <string>

#include "tieq/grid.h"
#include "tieq/photon_stats.h"

namespace tieq {

/// 16-bit binary PGM. The value mapping and grid metadata travel in a header comment:
///   # tieq scale=<s> offset=<o> pitch_um=<p> wavelength_um=<w>
/// with value = offset + scale * count. Values are scaled over [min, max] to use the full
/// 16-bit range, so a two-level map round-trips up to floating-point rounding.
template <typename Tag>
void write_pgm(const RealMap<Tag> &map, const std::filesystem::path &path);

/// Reads a PGM written by write_pgm. Files without the tieq comment are read as raw counts
/// with the fallback pitch and wavelength.
template <typename Tag>
RealMap<Tag> read_pgm(const std::filesystem::path &path, double fallback_pitch_um = 5.0,
                      double fallback_wavelength_um = 0.81);

/// Plain CSV, one image row per line, full double precision. Lossless.
template <typename Tag>
void write_csv(const RealMap<Tag> &map, const std::filesystem::path &path);

template <typename Tag>
RealMap<Tag> read_csv(const std::filesystem::path &path, double pitch_um, double wavelength_um);

/// Dispatches on the extension (.pgm or .csv).
PhaseMap load_phase_map(const std::filesystem::path &path, double pitch_um, double wavelength_um);

/// TwinFrameSet directory: signal.csv, idler.csv, mean_signal.csv, mean_idler.csv and
/// manifest.json holding the seed, the source model and the grid.
void write_twin_bundle(const TwinFrameSet &set, const SourceModel &source, const std::filesystem::path &dir);

struct TwinBundle {
    TwinFrameSet frames;
    SourceModel source;
};

TwinBundle read_twin_bundle(const std::filesystem::path &dir);

/// Writes `text` to `path`, creating parent directories. Throws std::runtime_error on failure.
void write_text_file(const std::filesystem::path &path, const std::string &text);

}  // namespace tieq

#endif
