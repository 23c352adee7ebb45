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

#include "tieq/samples.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "tieq/errors.h"

namespace tieq {
namespace {

constexpr int kCanvas = 80;

struct Rect {
    int x0, y0, x1, y1;  // half-open, canvas pixels
};

// "pi": top bar, two legs and a short foot on the right leg.
const std::vector<Rect> kPiGlyph = {
    {22, 23, 58, 30},
    {29, 30, 36, 57},
    {45, 30, 52, 57},
    {52, 51, 56, 57},
};

std::vector<Rect> squares_lattice() {
    std::vector<Rect> out;
    const int side = 6;
    const int period = 12;
    const int start = 19;
    for (int j = 0; j < 4; ++j) {
        for (int i = 0; i < 4; ++i) {
            int x = start + i * period;
            int y = start + j * period;
            out.push_back({x, y, x + side, y + side});
        }
    }
    return out;
}

bool inside(const std::vector<Rect> &shape, double cx, double cy) {
    for (const auto &r : shape) {
        if (cx >= r.x0 && cx < r.x1 && cy >= r.y0 && cy < r.y1) {
            return true;
        }
    }
    return false;
}

Roi scale_roi(const Rect &r, const Grid &grid) {
    double sx = static_cast<double>(grid.nx()) / kCanvas;
    double sy = static_cast<double>(grid.ny()) / kCanvas;
    int x0 = static_cast<int>(std::lround(r.x0 * sx));
    int y0 = static_cast<int>(std::lround(r.y0 * sy));
    int x1 = std::max(x0 + 1, static_cast<int>(std::lround(r.x1 * sx)));
    int y1 = std::max(y0 + 1, static_cast<int>(std::lround(r.y1 * sy)));
    return Roi{x0, y0, x1 - x0, y1 - y0};
}

}  // namespace

SampleKind parse_sample_kind(std::string_view name) {
    if (name == "pi_glyph") {
        return SampleKind::PiGlyph;
    }
    if (name == "squares") {
        return SampleKind::Squares;
    }
    if (name == "custom-file") {
        return SampleKind::CustomFile;
    }
    throw ConfigError("unknown sample kind '" + std::string(name) + "'");
}

std::string to_string(SampleKind kind) {
    switch (kind) {
        case SampleKind::PiGlyph:
            return "pi_glyph";
        case SampleKind::Squares:
            return "squares";
        case SampleKind::CustomFile:
            return "custom-file";
    }
    return "?";
}

std::string sample_version(SampleKind kind) {
    return to_string(kind) + "/v1";
}

PhaseMap make_sample(SampleKind kind, double step_rad, const Grid &grid) {
    if (!(step_rad > 0 && step_rad < std::numbers::pi)) {
        throw ConfigError("sample phase step must lie in (0, pi)");
    }
    std::vector<Rect> shape;
    switch (kind) {
        case SampleKind::PiGlyph:
            shape = kPiGlyph;
            break;
        case SampleKind::Squares:
            shape = squares_lattice();
            break;
        case SampleKind::CustomFile:
            throw ConfigError("custom-file samples are loaded from disk, not generated");
    }
    PhaseMap out(grid);
    const double sx = static_cast<double>(kCanvas) / grid.nx();
    const double sy = static_cast<double>(kCanvas) / grid.ny();
    for (int y = 0; y < grid.ny(); ++y) {
        for (int x = 0; x < grid.nx(); ++x) {
            if (inside(shape, (x + 0.5) * sx, (y + 0.5) * sy)) {
                out.at(x, y) = step_rad;
            }
        }
    }
    return out;
}

std::optional<StepRois> default_step_rois(SampleKind kind, const Grid &grid) {
    switch (kind) {
        case SampleKind::PiGlyph:
            // Core of the left leg vs background to its left, same rows.
            return StepRois{scale_roi({31, 35, 34, 52}, grid), scale_roi({12, 35, 20, 52}, grid)};
        case SampleKind::Squares:
            // Core of the square in row 1, column 1 vs background left of the lattice.
            return StepRois{scale_roi({32, 32, 36, 36}, grid), scale_roi({6, 32, 14, 36}, grid)};
        case SampleKind::CustomFile:
            return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace tieq
