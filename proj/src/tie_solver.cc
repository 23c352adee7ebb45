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

#include "tieq/tie_solver.h"

#include <cmath>
#include <complex>
#include <numbers>

#include "tieq/errors.h"
#include "tieq/fft.h"

namespace tieq {
namespace {

constexpr double kFourPiSq = 4.0 * std::numbers::pi * std::numbers::pi;

// Even extension [f0 .. fn-1, fn-1 .. f0] along both axes.
template <typename Tag>
std::vector<std::complex<double>> mirror_extend(const RealMap<Tag> &map) {
    const int nx = map.grid().nx();
    const int ny = map.grid().ny();
    const int mx = 2 * nx;
    std::vector<std::complex<double>> out(static_cast<size_t>(mx) * 2 * ny);
    for (int y = 0; y < 2 * ny; ++y) {
        int sy = y < ny ? y : 2 * ny - 1 - y;
        for (int x = 0; x < mx; ++x) {
            int sx = x < nx ? x : mx - 1 - x;
            out[static_cast<size_t>(y) * mx + x] = map.at(sx, sy);
        }
    }
    return out;
}

}  // namespace

void TieOptions::validate() const {
    if (!(dz_um > 0)) {
        throw ConfigError("TIE: dz must be positive");
    }
    if (!(k_wave > 0)) {
        throw ConfigError("TIE: wavenumber must be positive");
    }
    if (!(regularization_eps >= 0)) {
        throw ConfigError("TIE: regularization must be non-negative");
    }
    if (!use_uniform_approx) {
        throw ConfigError("TIE: only the uniform-illumination solver is available");
    }
    if (!(illum_mean > 0)) {
        throw NumericError("TIE: in-focus illumination is zero");
    }
}

DerivativeMap axial_derivative(const IntensityFrame &plus, const IntensityFrame &minus, double dz_um) {
    require_same_grid(plus.grid(), minus.grid(), "axial_derivative");
    if (!(dz_um > 0)) {
        throw ConfigError("axial_derivative: dz must be positive");
    }
    DerivativeMap out(plus.grid());
    auto p = plus.values();
    auto m = minus.values();
    auto d = out.values();
    const double scale = 1.0 / (2.0 * dz_um);
    for (size_t i = 0; i < d.size(); ++i) {
        d[i] = (p[i] - m[i]) * scale;
    }
    return out;
}

PhaseMap solve_tie(const DerivativeMap &didz, const TieOptions &options) {
    options.validate();
    for (double v : didz.values()) {
        if (!std::isfinite(v)) {
            throw NumericError("solve_tie: derivative map contains NaN or Inf");
        }
    }
    const Grid &g = didz.grid();
    const int mx = 2 * g.nx();
    const int my = 2 * g.ny();
    auto spectrum = mirror_extend(didz);
    fft2d(spectrum, mx, my, FftDirection::Forward);

    const double q_ref = 1.0 / (g.nx() * g.pitch_um());
    const double floor = options.regularization_eps * q_ref * q_ref;
    const double gain = options.k_wave / (kFourPiSq * options.illum_mean);
    for (int iy = 0; iy < my; ++iy) {
        double fy = fft_frequency(iy, my, g.pitch_um());
        for (int ix = 0; ix < mx; ++ix) {
            double fx = fft_frequency(ix, mx, g.pitch_um());
            auto &v = spectrum[static_cast<size_t>(iy) * mx + ix];
            if (ix == 0 && iy == 0) {
                v = 0;
                continue;
            }
            v *= gain / (fx * fx + fy * fy + floor);
        }
    }
    fft2d(spectrum, mx, my, FftDirection::Inverse);

    PhaseMap phase(g);
    double total = 0;
    for (int y = 0; y < g.ny(); ++y) {
        for (int x = 0; x < g.nx(); ++x) {
            double v = spectrum[static_cast<size_t>(y) * mx + x].real();
            phase.at(x, y) = v;
            total += v;
        }
    }
    double mean = total / static_cast<double>(g.size());
    for (double &v : phase.values()) {
        v -= mean;
    }
    return phase;
}

IntensityFrame quantum_subtract(const IntensityFrame &signal, const IntensityFrame &idler,
                                const IntensityMap &idler_mean, const QuantumCorrection &correction) {
    require_same_grid(signal.grid(), idler.grid(), "quantum_subtract");
    require_same_grid(signal.grid(), idler_mean.grid(), "quantum_subtract");
    if (!(correction.k_factor >= 0 && correction.k_factor <= 1)) {
        throw ConfigError("quantum_subtract: k_factor must lie in [0, 1]");
    }
    if (!correction.enabled || correction.k_factor == 0) {
        return signal;
    }
    IntensityFrame out = signal;
    auto o = out.values();
    auto id = idler.values();
    auto im = idler_mean.values();
    for (size_t i = 0; i < o.size(); ++i) {
        o[i] -= correction.k_factor * (id[i] - im[i]);
    }
    return out;
}

IntensityFrame quantum_subtract(const IntensityFrame &signal, const IntensityFrame &idler,
                                const IntensityMap &idler_mean, const IntensityMap &k_map) {
    require_same_grid(signal.grid(), idler.grid(), "quantum_subtract");
    require_same_grid(signal.grid(), idler_mean.grid(), "quantum_subtract");
    require_same_grid(signal.grid(), k_map.grid(), "quantum_subtract");
    IntensityFrame out = signal;
    auto o = out.values();
    auto id = idler.values();
    auto im = idler_mean.values();
    auto k = k_map.values();
    for (size_t i = 0; i < o.size(); ++i) {
        o[i] -= k[i] * (id[i] - im[i]);
    }
    return out;
}

KOptEstimate estimate_k_opt(std::span<const IntensityFrame> signal, std::span<const IntensityFrame> idler) {
    if (signal.size() != idler.size()) {
        throw ConfigError("estimate_k_opt: signal and idler counts differ");
    }
    if (signal.size() < 2) {
        throw ConfigError("estimate_k_opt: need at least two calibration frames");
    }
    const Grid &g = signal.front().grid();
    const size_t n = g.size();
    std::vector<double> mean_s(n, 0.0), mean_i(n, 0.0);
    for (size_t f = 0; f < signal.size(); ++f) {
        require_same_grid(g, signal[f].grid(), "estimate_k_opt");
        require_same_grid(g, idler[f].grid(), "estimate_k_opt");
        auto s = signal[f].values();
        auto i = idler[f].values();
        for (size_t p = 0; p < n; ++p) {
            mean_s[p] += s[p];
            mean_i[p] += i[p];
        }
    }
    const double frames = static_cast<double>(signal.size());
    for (size_t p = 0; p < n; ++p) {
        mean_s[p] /= frames;
        mean_i[p] /= frames;
    }
    std::vector<double> cov(n, 0.0), var(n, 0.0);
    for (size_t f = 0; f < signal.size(); ++f) {
        auto s = signal[f].values();
        auto i = idler[f].values();
        for (size_t p = 0; p < n; ++p) {
            double ds = s[p] - mean_s[p];
            double di = i[p] - mean_i[p];
            cov[p] += ds * di;
            var[p] += di * di;
        }
    }
    KOptEstimate out{IntensityMap(g), 0.0};
    double cov_total = 0;
    double var_total = 0;
    for (size_t p = 0; p < n; ++p) {
        out.per_pixel.values()[p] = var[p] > 0 ? cov[p] / var[p] : 0.0;
        cov_total += cov[p];
        var_total += var[p];
    }
    if (!(var_total > 0)) {
        throw NumericError("estimate_k_opt: idler frames have zero variance");
    }
    out.scalar = cov_total / var_total;
    return out;
}

KOptEstimate estimate_k_opt(std::span<const TwinFrameSet> calibration, int filter_size) {
    std::vector<IntensityFrame> signal;
    std::vector<IntensityFrame> idler;
    signal.reserve(calibration.size());
    idler.reserve(calibration.size());
    for (const auto &set : calibration) {
        signal.push_back(averaging_filter(set.signal, filter_size));
        idler.push_back(averaging_filter(set.aligned_idler(), filter_size));
    }
    return estimate_k_opt(signal, idler);
}

double predicted_noise_reduction(double eta, double alpha) {
    if (!(eta >= 0 && eta <= 1) || !(alpha >= 0 && alpha <= 1)) {
        throw ConfigError("predicted_noise_reduction: eta and alpha must lie in [0, 1]");
    }
    double c = (1.0 - alpha) * eta;
    return 1.0 - c * c;
}

std::vector<double> noise_artifact_spectrum(double sigma_flat, const TieOptions &options, const Grid &grid) {
    options.validate();
    std::vector<double> out(grid.size(), 0.0);
    const double gain =
        options.k_wave * sigma_flat / (kFourPiSq * std::numbers::sqrt2 * options.illum_mean * options.dz_um);
    for (int iy = 0; iy < grid.ny(); ++iy) {
        double fy = grid.freq_y(iy);
        for (int ix = 0; ix < grid.nx(); ++ix) {
            if (ix == 0 && iy == 0) {
                continue;
            }
            double fx = grid.freq_x(ix);
            out[static_cast<size_t>(iy) * grid.nx() + ix] = gain / (fx * fx + fy * fy);
        }
    }
    return out;
}

std::vector<SpectrumBin> radial_power_spectrum(const PhaseMap &phase) {
    const Grid &g = phase.grid();
    const int mx = 2 * g.nx();
    const int my = 2 * g.ny();
    auto spectrum = mirror_extend(phase);
    fft2d(spectrum, mx, my, FftDirection::Forward);
    const double dq = 1.0 / (mx * g.pitch_um());
    const int rings = static_cast<int>(std::floor(g.q_max() / dq));
    std::vector<SpectrumBin> bins(rings);
    for (int iy = 0; iy < my; ++iy) {
        double fy = fft_frequency(iy, my, g.pitch_um());
        for (int ix = 0; ix < mx; ++ix) {
            double fx = fft_frequency(ix, mx, g.pitch_um());
            int ring = static_cast<int>(std::lround(std::hypot(fx, fy) / dq));
            if (ring < 1 || ring > rings) {
                continue;
            }
            auto &bin = bins[ring - 1];
            bin.power += std::norm(spectrum[static_cast<size_t>(iy) * mx + ix]);
            bin.count += 1;
        }
    }
    for (int r = 0; r < rings; ++r) {
        bins[r].q = (r + 1) * dq;
        if (bins[r].count > 0) {
            bins[r].power /= bins[r].count;
        }
    }
    return bins;
}

}  // namespace tieq
