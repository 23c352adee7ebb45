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

#ifndef TIEQ_SAMPLES_H
#define TIEQ_SAMPLES_H

#include <optional>
#include <string>
#include <string_view>

#include "tieq/grid.h"
#include "tieq/metrics.h"

namespace tieq {

enum class SampleKind { PiGlyph, Squares, CustomFile };

/// Throws ConfigError for anything other than "pi_glyph", "squares" or "custom-file".
SampleKind parse_sample_kind(std::string_view name);
std::string to_string(SampleKind kind);

/// Binary pure-phase test object with values {0, step_rad}.
///
/// Shapes are defined on an 80 x 80 reference canvas and resampled (nearest pixel) to the
/// requested grid. The geometry is versioned (see sample_version) so runs stay reproducible.
/// CustomFile is rejected here; use load_phase_map from io.h.
PhaseMap make_sample(SampleKind kind, double step_rad, const Grid &grid);

/// Identifier of the built-in geometry, e.g. "pi_glyph/v1".
std::string sample_version(SampleKind kind);

struct StepRois {
    Roi inside;
    Roi outside;
};

/// Default ROIs for the phase-step estimate: inside an etched feature and in nearby
/// background. Empty for custom files.
std::optional<StepRois> default_step_rois(SampleKind kind, const Grid &grid);

}  // namespace tieq

#endif
