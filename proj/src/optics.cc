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

#include "tieq/optics.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "tieq/errors.h"
#include "tieq/fft.h"

namespace tieq {

double max_safe_dz_um(const Grid &grid) {
    double extent = std::min(grid.nx(), grid.ny()) * grid.pitch_um();
    return 0.5 * extent / (grid.wavelength_um() * grid.q_max());
}

ComplexField fresnel_propagate(const ComplexField &field, double dz_um) {
    if (!std::isfinite(dz_um)) {
        throw NumericError("fresnel_propagate: dz is not finite");
    }
    const Grid &g = field.grid();
    double limit = max_safe_dz_um(g);
    if (std::abs(dz_um) > limit) {
        std::ostringstream msg;
        msg << "propagation distance " << dz_um << " um exceeds the sampling bound of the grid; max safe |dz| is "
            << limit << " um";
        throw AliasingError(msg.str(), limit);
    }
    ComplexField out = field;
    if (dz_um == 0) {
        return out;
    }
    auto data = out.values();
    fft2d(data, g.nx(), g.ny(), FftDirection::Forward);
    const double chirp = std::numbers::pi * g.wavelength_um() * dz_um;
    for (int iy = 0; iy < g.ny(); ++iy) {
        double fy = g.freq_y(iy);
        for (int ix = 0; ix < g.nx(); ++ix) {
            double fx = g.freq_x(ix);
            out.at(ix, iy) *= std::polar(1.0, -chirp * (fx * fx + fy * fy));
        }
    }
    fft2d(data, g.nx(), g.ny(), FftDirection::Inverse);
    return out;
}

ComplexField apply_phase_object(const ComplexField &field, const PhaseMap &phase) {
    require_same_grid(field.grid(), phase.grid(), "apply_phase_object");
    ComplexField out = field;
    auto values = out.values();
    auto p = phase.values();
    for (size_t i = 0; i < values.size(); ++i) {
        values[i] *= std::polar(1.0, p[i]);
    }
    return out;
}

DefocusedIntensities defocused_intensities(const ComplexField &illumination, const PhaseMap &phase, double dz_um) {
    if (!(dz_um > 0)) {
        throw ConfigError("defocused_intensities: dz must be positive");
    }
    ComplexField object = apply_phase_object(illumination, phase);
    return DefocusedIntensities{
        fresnel_propagate(object, dz_um).intensity(),
        fresnel_propagate(object, -dz_um).intensity(),
        illumination.intensity(),
    };
}

namespace {

double soft_edge(double coord, double half_width, double rolloff) {
    double a = std::abs(coord);
    if (a <= half_width) {
        return 1.0;
    }
    if (rolloff <= 0 || a >= half_width + rolloff) {
        return 0.0;
    }
    double c = std::cos(0.5 * std::numbers::pi * (a - half_width) / rolloff);
    return c * c;
}

}  // namespace

ComplexField make_illumination(const Grid &grid, const IlluminationSpec &spec, double peak_photons) {
    if (!(peak_photons >= 0)) {
        throw ConfigError("illumination intensity must be non-negative");
    }
    if (spec.profile == IlluminationSpec::Profile::Gaussian && !(spec.fwhm_um > 0)) {
        throw ConfigError("Gaussian illumination needs a positive FWHM");
    }
    ComplexField field(grid);
    const double cx = 0.5 * (grid.nx() - 1);
    const double cy = 0.5 * (grid.ny() - 1);
    // Intensity exp(-4 ln2 r^2 / fwhm^2); the amplitude carries half the exponent.
    const double amp_rate = spec.profile == IlluminationSpec::Profile::Gaussian
                                ? 2.0 * std::numbers::ln2 / (spec.fwhm_um * spec.fwhm_um)
                                : 0.0;
    const double peak_amp = std::sqrt(peak_photons);
    for (int iy = 0; iy < grid.ny(); ++iy) {
        double y = (iy - cy) * grid.pitch_um();
        for (int ix = 0; ix < grid.nx(); ++ix) {
            double x = (ix - cx) * grid.pitch_um();
            double amp = peak_amp * std::exp(-amp_rate * (x * x + y * y));
            if (spec.aperture_half_width_um > 0) {
                amp *= soft_edge(x, spec.aperture_half_width_um, spec.rolloff_um) *
                       soft_edge(y, spec.aperture_half_width_um, spec.rolloff_um);
            }
            field.at(ix, iy) = amp;
        }
    }
    return field;
}

}  // namespace tieq
