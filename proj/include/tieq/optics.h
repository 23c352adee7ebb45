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

#ifndef TIEQ_OPTICS_H
#define TIEQ_OPTICS_H

#include "tieq/grid.h"

namespace tieq {

/// Largest |dz| accepted by fresnel_propagate on `grid`.
///
/// The bound is lambda * |dz| * q_max <= L / 2 with L the shorter grid extent: light at the
/// highest sampled frequency must not walk more than half a period window.
double max_safe_dz_um(const Grid &grid);

/// Paraxial free-space propagation by the transfer function exp(-i*pi*lambda*dz*|q|^2).
///
/// Positive dz propagates away from the source. The kernel is applied on the periodic grid of
/// `field`, so the operation is unitary and propagate(+dz) followed by propagate(-dz) is the
/// identity. Callers that need open boundaries embed the field in a larger, zero-padded grid
/// first (see make_illumination). Throws AliasingError when |dz| > max_safe_dz_um.
ComplexField fresnel_propagate(const ComplexField &field, double dz_um);

/// Thin pure-phase transmission: multiplies each sample by exp(i * phase).
ComplexField apply_phase_object(const ComplexField &field, const PhaseMap &phase);

struct DefocusedIntensities {
    IntensityMap plus;
    IntensityMap minus;
    IntensityMap focus;
};

/// Noiseless intensities at +dz, -dz and in focus for a phase object lit by `illumination`.
DefocusedIntensities defocused_intensities(const ComplexField &illumination, const PhaseMap &phase, double dz_um);

struct IlluminationSpec {
    enum class Profile { Uniform, Gaussian };
    Profile profile = Profile::Gaussian;
    /// Intensity FWHM of the Gaussian envelope.
    double fwhm_um = 2000.0;
    /// Half-width of the flat part of the square soft aperture; <= 0 disables the aperture.
    double aperture_half_width_um = 0.0;
    /// Width of the cos^2 roll-off outside the flat part.
    double rolloff_um = 100.0;
};

/// Real-valued illumination with intensity `peak_photons` at the grid centre.
ComplexField make_illumination(const Grid &grid, const IlluminationSpec &spec, double peak_photons);

}  // namespace tieq

#endif
