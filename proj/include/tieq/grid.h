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

#ifndef TIEQ_GRID_H
#define TIEQ_GRID_H

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace tieq {

/// Uniform sampling grid at the object plane.
///
/// Frequencies follow the FFT ordering (0, 1, ..., n/2-1, -n/2, ..., -1) / (n * pitch) and are
/// expressed in cycles per micrometre, so the Nyquist frequency is 1 / (2 * pitch).
class Grid {
   public:
    /// Throws ConfigError unless nx, ny are even and >= 8, and pitch, wavelength are positive.
    Grid(int nx, int ny, double pitch_um, double wavelength_um);

    int nx() const {
        return nx_;
    }
    int ny() const {
        return ny_;
    }
    std::size_t size() const {
        return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);
    }
    double pitch_um() const {
        return pitch_um_;
    }
    double wavelength_um() const {
        return wavelength_um_;
    }
    /// 2*pi / wavelength, rad/um.
    double wavenumber() const;
    double q_max() const {
        return 0.5 / pitch_um_;
    }
    double freq_x(int ix) const;
    double freq_y(int iy) const;

    /// Same pitch and wavelength, different pixel counts.
    Grid resized(int nx, int ny) const;

    bool operator==(const Grid &other) const = default;

   private:
    int nx_;
    int ny_;
    double pitch_um_;
    double wavelength_um_;
};

/// FFT frequency of index i on an n-point axis with spacing `pitch`, cycles per unit length.
double fft_frequency(int i, int n, double pitch);

/// Throws ConfigError when the two grids differ.
void require_same_grid(const Grid &a, const Grid &b, const char *what);

/// Row-major real-valued raster bound to a grid. The tag keeps phase maps, mean intensities,
/// detected frames and derivative maps from being mixed up by accident.
template <typename Tag>
class RealMap {
   public:
    explicit RealMap(const Grid &grid) : grid_(grid), values_(grid.size(), 0.0) {
    }
    RealMap(const Grid &grid, std::vector<double> values);

    const Grid &grid() const {
        return grid_;
    }
    std::span<const double> values() const {
        return values_;
    }
    std::span<double> values() {
        return values_;
    }
    const std::vector<double> &vector() const {
        return values_;
    }
    double &at(int x, int y) {
        return values_[static_cast<std::size_t>(y) * grid_.nx() + x];
    }
    double at(int x, int y) const {
        return values_[static_cast<std::size_t>(y) * grid_.nx() + x];
    }
    double sum() const;
    double mean() const {
        return sum() / static_cast<double>(values_.size());
    }

    bool operator==(const RealMap &other) const = default;

   private:
    Grid grid_;
    std::vector<double> values_;
};

struct PhaseTag {};
struct IntensityTag {};
struct CountsTag {};
struct DerivativeTag {};

/// Phase in radians.
using PhaseMap = RealMap<PhaseTag>;
/// Noiseless mean intensity, photons per pixel.
using IntensityMap = RealMap<IntensityTag>;
/// Detected photon-equivalent counts of one exposure.
using IntensityFrame = RealMap<CountsTag>;
/// Axial intensity derivative, photons per pixel per um.
using DerivativeMap = RealMap<DerivativeTag>;

template <typename To, typename From>
RealMap<To> retag(const RealMap<From> &from) {
    return RealMap<To>(from.grid(), from.vector());
}

/// Copies the window [x0, x0 + nx) x [y0, y0 + ny).
template <typename Tag>
RealMap<Tag> crop(const RealMap<Tag> &map, int x0, int y0, int nx, int ny);

/// Places `map` at offset (x0, y0) inside a zero-filled raster of size nx x ny.
template <typename Tag>
RealMap<Tag> embed(const RealMap<Tag> &map, int x0, int y0, int nx, int ny);

/// Point reflection through the array centre: (x, y) -> (nx-1-x, ny-1-y).
template <typename Tag>
RealMap<Tag> point_reflect(const RealMap<Tag> &map);

/// Sampled complex optical field; |value|^2 is the mean photon number per pixel.
class ComplexField {
   public:
    explicit ComplexField(const Grid &grid) : grid_(grid), values_(grid.size()) {
    }
    ComplexField(const Grid &grid, std::vector<std::complex<double>> values);

    const Grid &grid() const {
        return grid_;
    }
    std::span<const std::complex<double>> values() const {
        return values_;
    }
    std::span<std::complex<double>> values() {
        return values_;
    }
    std::complex<double> &at(int x, int y) {
        return values_[static_cast<std::size_t>(y) * grid_.nx() + x];
    }
    std::complex<double> at(int x, int y) const {
        return values_[static_cast<std::size_t>(y) * grid_.nx() + x];
    }
    double total_power() const;
    IntensityMap intensity() const;

   private:
    Grid grid_;
    std::vector<std::complex<double>> values_;
};

}  // namespace tieq

#endif
