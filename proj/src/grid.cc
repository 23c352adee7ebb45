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

#include "tieq/grid.h"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "tieq/errors.h"

namespace tieq {

Grid::Grid(int nx, int ny, double pitch_um, double wavelength_um)
    : nx_(nx), ny_(ny), pitch_um_(pitch_um), wavelength_um_(wavelength_um) {
    if (nx < 8 || ny < 8 || nx % 2 != 0 || ny % 2 != 0) {
        throw ConfigError(
            "grid dimensions must be even and >= 8, got " + std::to_string(nx) + "x" + std::to_string(ny));
    }
    if (!(pitch_um > 0) || !std::isfinite(pitch_um)) {
        throw ConfigError("grid pitch must be positive");
    }
    if (!(wavelength_um > 0) || !std::isfinite(wavelength_um)) {
        throw ConfigError("wavelength must be positive");
    }
}

double Grid::wavenumber() const {
    return 2.0 * std::numbers::pi / wavelength_um_;
}

double Grid::freq_x(int ix) const {
    return fft_frequency(ix, nx_, pitch_um_);
}

double Grid::freq_y(int iy) const {
    return fft_frequency(iy, ny_, pitch_um_);
}

Grid Grid::resized(int nx, int ny) const {
    return Grid(nx, ny, pitch_um_, wavelength_um_);
}

double fft_frequency(int i, int n, double pitch) {
    int k = i < (n + 1) / 2 ? i : i - n;
    return static_cast<double>(k) / (static_cast<double>(n) * pitch);
}

void require_same_grid(const Grid &a, const Grid &b, const char *what) {
    if (!(a == b)) {
        throw ConfigError(std::string(what) + ": grid mismatch");
    }
}

template <typename Tag>
RealMap<Tag>::RealMap(const Grid &grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw ConfigError("raster size does not match grid");
    }
}

template <typename Tag>
double RealMap<Tag>::sum() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0);
}

template <typename Tag>
RealMap<Tag> crop(const RealMap<Tag> &map, int x0, int y0, int nx, int ny) {
    const Grid &g = map.grid();
    if (x0 < 0 || y0 < 0 || x0 + nx > g.nx() || y0 + ny > g.ny()) {
        throw ConfigError("crop window outside raster");
    }
    RealMap<Tag> out(g.resized(nx, ny));
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            out.at(x, y) = map.at(x0 + x, y0 + y);
        }
    }
    return out;
}

template <typename Tag>
RealMap<Tag> embed(const RealMap<Tag> &map, int x0, int y0, int nx, int ny) {
    const Grid &g = map.grid();
    if (x0 < 0 || y0 < 0 || x0 + g.nx() > nx || y0 + g.ny() > ny) {
        throw ConfigError("embedding window outside target raster");
    }
    RealMap<Tag> out(g.resized(nx, ny));
    for (int y = 0; y < g.ny(); ++y) {
        for (int x = 0; x < g.nx(); ++x) {
            out.at(x0 + x, y0 + y) = map.at(x, y);
        }
    }
    return out;
}

template <typename Tag>
RealMap<Tag> point_reflect(const RealMap<Tag> &map) {
    const Grid &g = map.grid();
    RealMap<Tag> out(g);
    for (int y = 0; y < g.ny(); ++y) {
        for (int x = 0; x < g.nx(); ++x) {
            out.at(g.nx() - 1 - x, g.ny() - 1 - y) = map.at(x, y);
        }
    }
    return out;
}

#define TIEQ_INSTANTIATE(TAG)                                                     \
    template class RealMap<TAG>;                                                  \
    template RealMap<TAG> crop(const RealMap<TAG> &, int, int, int, int);         \
    template RealMap<TAG> embed(const RealMap<TAG> &, int, int, int, int);        \
    template RealMap<TAG> point_reflect(const RealMap<TAG> &);

TIEQ_INSTANTIATE(PhaseTag)
TIEQ_INSTANTIATE(IntensityTag)
TIEQ_INSTANTIATE(CountsTag)
TIEQ_INSTANTIATE(DerivativeTag)

#undef TIEQ_INSTANTIATE

ComplexField::ComplexField(const Grid &grid, std::vector<std::complex<double>> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw ConfigError("field size does not match grid");
    }
}

double ComplexField::total_power() const {
    double total = 0;
    for (const auto &v : values_) {
        total += std::norm(v);
    }
    return total;
}

IntensityMap ComplexField::intensity() const {
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) {
        out[i] = std::norm(values_[i]);
    }
    return IntensityMap(grid_, std::move(out));
}

}  // namespace tieq
