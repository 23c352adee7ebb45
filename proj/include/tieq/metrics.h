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

#ifndef TIEQ_METRICS_H
#define TIEQ_METRICS_H

#include <span>

#include "tieq/grid.h"

namespace tieq {

/// Rectangular region of interest in pixels.
struct Roi {
    int x0 = 0;
    int y0 = 0;
    int width = 1;
    int height = 1;

    bool overlaps(const Roi &other) const;
    /// Throws ConfigError when empty or outside `grid`.
    void validate(const Grid &grid) const;
};

struct EnsembleStats {
    double mean = 0.0;
    double std_dev = 0.0;
    int n_samples = 0;
    double std_error = 0.0;
};

/// Pearson correlation of two phase maps over the image minus a `border_px` frame on each
/// side (the border hides solver edge effects). Throws NumericError when either map is
/// constant over the evaluated region.
double pearson(const PhaseMap &phase, const PhaseMap &reference, int border_px = 4);

/// Mean over roi_in minus mean over roi_out.
double phase_step_estimate(const PhaseMap &phase, const Roi &roi_in, const Roi &roi_out);

/// Mean and unbiased (n - 1) standard deviation; needs at least two values.
EnsembleStats ensemble_stats(std::span<const double> values);

}  // namespace tieq

#endif
