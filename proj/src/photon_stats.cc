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

#include "tieq/photon_stats.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "tieq/errors.h"
#include "tieq/rng.h"

namespace tieq {
namespace {

// Antiderivative of the normal CDF scaled to width sigma: d/da H(a) = Phi(a / sigma).
// sigma == 0 is the step-function limit max(a, 0).
double integrated_cdf(double a, double sigma) {
    if (sigma == 0) {
        return std::max(a, 0.0);
    }
    double t = a / sigma;
    double cdf = 0.5 * std::erfc(-t / std::numbers::sqrt2);
    double pdf = std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
    return sigma * (t * cdf + pdf);
}

struct Offset {
    int dx;
    int dy;
    double weight;
};

std::vector<std::pair<int, double>> axis_weights(double pitch, double delta, double sigma) {
    int reach = static_cast<int>(std::ceil((std::abs(delta) + 12.0 * sigma) / pitch)) + 1;
    std::vector<std::pair<int, double>> out;
    for (int m = -reach; m <= reach; ++m) {
        double w = cell_transfer_probability(m, pitch, delta, sigma);
        if (w > 1e-13) {
            out.emplace_back(m, w);
        }
    }
    return out;
}

std::vector<Offset> jitter_offsets(const Grid &grid, const SourceModel &source) {
    auto wx = axis_weights(grid.pitch_um(), source.misalignment_um[0], source.sigma_corr_um);
    auto wy = axis_weights(grid.pitch_um(), source.misalignment_um[1], source.sigma_corr_um);
    std::vector<Offset> out;
    double total = 0;
    for (auto [dy, py] : wy) {
        for (auto [dx, px] : wx) {
            double w = px * py;
            if (w > 1e-13) {
                out.push_back({dx, dy, w});
                total += w;
            }
        }
    }
    for (auto &o : out) {
        o.weight /= total;
    }
    return out;
}

long draw_poisson(Rng &rng, double mean) {
    if (mean <= 0) {
        return 0;
    }
    return std::poisson_distribution<long>(mean)(rng);
}

void require_non_negative(const IntensityMap &map, const char *what) {
    for (double v : map.values()) {
        if (!(v >= 0) || !std::isfinite(v)) {
            throw ConfigError(std::string(what) + " must be finite and non-negative");
        }
    }
}

}  // namespace

void SourceModel::validate() const {
    if (!(n_mean > 0)) {
        throw ConfigError("n_mean must be positive");
    }
    if (!(eta0 > 0 && eta0 <= 1)) {
        throw ConfigError("eta0 must lie in (0, 1]");
    }
    if (!(sigma_corr_um >= 0)) {
        throw ConfigError("sigma_corr_um must be non-negative");
    }
    if (!(read_noise_e >= 0)) {
        throw ConfigError("read_noise_e must be non-negative");
    }
    if (!std::isfinite(misalignment_um[0]) || !std::isfinite(misalignment_um[1])) {
        throw ConfigError("misalignment must be finite");
    }
}

double cell_transfer_probability(int offset, double pitch_um, double delta_um, double sigma_um) {
    double hi = (offset + 1) * pitch_um - delta_um;
    double lo = offset * pitch_um - delta_um;
    double v = integrated_cdf(hi, sigma_um) - integrated_cdf(hi - pitch_um, sigma_um) -
               integrated_cdf(lo, sigma_um) + integrated_cdf(lo - pitch_um, sigma_um);
    return std::clamp(v / pitch_um, 0.0, 1.0);
}

double heralding_efficiency(double pixel_um, std::array<double, 2> delta_um, double sigma_um, double eta0) {
    if (!(pixel_um > 0)) {
        throw ConfigError("heralding_efficiency: pixel size must be positive");
    }
    if (!(sigma_um >= 0)) {
        throw ConfigError("heralding_efficiency: sigma must be non-negative");
    }
    return eta0 * cell_transfer_probability(0, pixel_um, delta_um[0], sigma_um) *
           cell_transfer_probability(0, pixel_um, delta_um[1], sigma_um);
}

double eta0_for_heralding(double eta, double pixel_um, std::array<double, 2> delta_um, double sigma_um) {
    double geometric = heralding_efficiency(pixel_um, delta_um, sigma_um, 1.0);
    double eta0 = eta / geometric;
    if (!(eta0 > 0 && eta0 <= 1)) {
        throw ConfigError("requested heralding efficiency is not reachable with eta0 <= 1");
    }
    return eta0;
}

TwinFrameSet sample_twin_frames(const IntensityMap &mean_signal, const IntensityMap &mean_idler,
                                const SourceModel &source, std::uint64_t seed) {
    require_same_grid(mean_signal.grid(), mean_idler.grid(), "sample_twin_frames");
    require_non_negative(mean_signal, "mean_signal");
    require_non_negative(mean_idler, "mean_idler");
    source.validate();

    const Grid &grid = mean_signal.grid();
    const int nx = grid.nx();
    const int ny = grid.ny();
    const double eta0 = source.eta0;
    const auto offsets = jitter_offsets(grid, source);

    Rng rng = make_rng(seed);
    IntensityFrame signal(grid);
    IntensityFrame idler(grid);
    IntensityMap idler_expect(grid);

    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            const double i0 = mean_idler.at(x, y);
            const double is = mean_signal.at(x, y);
            const double retained = std::max(0.0, i0 - std::abs(is - i0));
            const double stay = i0 > 0 ? retained / i0 : 0.0;

            long s_count = 0;
            for (const Offset &o : offsets) {
                const double both = i0 * eta0 * stay * o.weight;
                const double idler_only = i0 * (1.0 - eta0 * stay) * o.weight;
                long a = draw_poisson(rng, both);
                long c = draw_poisson(rng, idler_only);
                s_count += a;
                int tx = x + o.dx;
                int ty = y + o.dy;
                if (tx >= 0 && tx < nx && ty >= 0 && ty < ny) {
                    idler.at(tx, ty) += static_cast<double>(a + c);
                    idler_expect.at(tx, ty) += i0 * o.weight;
                }
            }
            s_count += draw_poisson(rng, i0 * stay * (1.0 - eta0));
            s_count += draw_poisson(rng, is - retained);
            signal.at(x, y) = static_cast<double>(s_count);
        }
    }

    return TwinFrameSet{
        std::move(signal),
        point_reflect(idler),
        mean_signal,
        point_reflect(idler_expect),
        seed,
    };
}

IntensityFrame sample_signal_frame(const IntensityMap &mean, std::uint64_t seed) {
    require_non_negative(mean, "mean");
    Rng rng = make_rng(seed);
    IntensityFrame out(mean.grid());
    auto dst = out.values();
    auto src = mean.values();
    for (size_t i = 0; i < dst.size(); ++i) {
        dst[i] = static_cast<double>(draw_poisson(rng, src[i]));
    }
    return out;
}

template <typename Tag>
RealMap<Tag> averaging_filter(const RealMap<Tag> &frame, int d) {
    const Grid &g = frame.grid();
    if (d < 1) {
        throw ConfigError("averaging_filter: size must be >= 1");
    }
    if (d > g.nx() || d > g.ny()) {
        throw ConfigError("averaging_filter: size larger than the image");
    }
    if (d == 1) {
        return frame;
    }
    const int nx = g.nx();
    const int ny = g.ny();
    const int back = (d + 1) / 2 - 1;
    // Summed-area table with a zero guard row and column.
    std::vector<double> sat(static_cast<size_t>(nx + 1) * (ny + 1), 0.0);
    auto s = [&](int x, int y) -> double & { return sat[static_cast<size_t>(y) * (nx + 1) + x]; };
    for (int y = 0; y < ny; ++y) {
        double row = 0;
        for (int x = 0; x < nx; ++x) {
            row += frame.at(x, y);
            s(x + 1, y + 1) = s(x + 1, y) + row;
        }
    }
    RealMap<Tag> out(g);
    for (int y = 0; y < ny; ++y) {
        int y0 = std::max(0, y - back);
        int y1 = std::min(ny, y - back + d);
        for (int x = 0; x < nx; ++x) {
            int x0 = std::max(0, x - back);
            int x1 = std::min(nx, x - back + d);
            double total = s(x1, y1) - s(x0, y1) - s(x1, y0) + s(x0, y0);
            out.at(x, y) = total / static_cast<double>((x1 - x0) * (y1 - y0));
        }
    }
    return out;
}

template IntensityFrame averaging_filter(const IntensityFrame &, int);
template IntensityMap averaging_filter(const IntensityMap &, int);

IntensityFrame add_read_noise(const IntensityFrame &frame, double sigma_e, std::uint64_t seed) {
    if (!(sigma_e >= 0)) {
        throw ConfigError("read noise must be non-negative");
    }
    if (sigma_e == 0) {
        return frame;
    }
    Rng rng = make_rng(seed);
    std::normal_distribution<double> noise(0.0, sigma_e);
    IntensityFrame out = frame;
    for (double &v : out.values()) {
        v += noise(rng);
    }
    return out;
}

double alpha_estimate(const IntensityMap &focus_mean, const IntensityMap &defocus_mean) {
    require_same_grid(focus_mean.grid(), defocus_mean.grid(), "alpha_estimate");
    double mean_focus = focus_mean.mean();
    if (!(mean_focus > 0)) {
        throw NumericError("alpha_estimate: in-focus mean intensity is zero");
    }
    auto a = focus_mean.values();
    auto b = defocus_mean.values();
    double total = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        total += std::abs(a[i] - b[i]);
    }
    return total / static_cast<double>(a.size()) / mean_focus;
}

}  // namespace tieq
