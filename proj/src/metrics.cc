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

#include <algorithm>
#include <cmath>

#include "tieq/errors.h"

namespace tieq {

bool Roi::overlaps(const Roi &other) const {
    return x0 < other.x0 + other.width && other.x0 < x0 + width && y0 < other.y0 + other.height &&
           other.y0 < y0 + height;
}

void Roi::validate(const Grid &grid) const {
    if (width < 1 || height < 1) {
        throw ConfigError("ROI must cover at least one pixel");
    }
    if (x0 < 0 || y0 < 0 || x0 + width > grid.nx() || y0 + height > grid.ny()) {
        throw ConfigError("ROI lies outside the image");
    }
}

double pearson(const PhaseMap &phase, const PhaseMap &reference, int border_px) {
    require_same_grid(phase.grid(), reference.grid(), "pearson");
    const Grid &g = phase.grid();
    if (border_px < 0 || 2 * border_px >= g.nx() || 2 * border_px >= g.ny()) {
        throw ConfigError("pearson: border leaves no pixels");
    }
    double sa = 0, sb = 0;
    int n = 0;
    for (int y = border_px; y < g.ny() - border_px; ++y) {
        for (int x = border_px; x < g.nx() - border_px; ++x) {
            sa += phase.at(x, y);
            sb += reference.at(x, y);
            ++n;
        }
    }
    const double ma = sa / n;
    const double mb = sb / n;
    double cov = 0, va = 0, vb = 0;
    for (int y = border_px; y < g.ny() - border_px; ++y) {
        for (int x = border_px; x < g.nx() - border_px; ++x) {
            double a = phase.at(x, y) - ma;
            double b = reference.at(x, y) - mb;
            cov += a * b;
            va += a * a;
            vb += b * b;
        }
    }
    if (!(va > 0) || !(vb > 0)) {
        throw NumericError("pearson: correlation undefined for a constant image");
    }
    return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

namespace {

double roi_mean(const PhaseMap &phase, const Roi &roi) {
    double total = 0;
    for (int y = roi.y0; y < roi.y0 + roi.height; ++y) {
        for (int x = roi.x0; x < roi.x0 + roi.width; ++x) {
            total += phase.at(x, y);
        }
    }
    return total / (static_cast<double>(roi.width) * roi.height);
}

}  // namespace

double phase_step_estimate(const PhaseMap &phase, const Roi &roi_in, const Roi &roi_out) {
    roi_in.validate(phase.grid());
    roi_out.validate(phase.grid());
    if (roi_in.overlaps(roi_out)) {
        throw ConfigError("phase_step_estimate: ROIs overlap");
    }
    return roi_mean(phase, roi_in) - roi_mean(phase, roi_out);
}

EnsembleStats ensemble_stats(std::span<const double> values) {
    if (values.size() < 2) {
        throw ConfigError("ensemble_stats: need at least two samples");
    }
    const double n = static_cast<double>(values.size());
    double mean = 0;
    for (double v : values) {
        mean += v;
    }
    mean /= n;
    double ss = 0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    EnsembleStats out;
    out.mean = mean;
    out.std_dev = std::sqrt(ss / (n - 1));
    out.n_samples = static_cast<int>(values.size());
    out.std_error = out.std_dev / std::sqrt(n);
    return out;
}

}  // namespace tieq
