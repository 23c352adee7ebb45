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

#ifndef TIEQ_PHOTON_STATS_H
#define TIEQ_PHOTON_STATS_H

#include <array>
#include <cstdint>
#include <vector>

#include "tieq/grid.h"

namespace tieq {

/// Phenomenological twin-beam source and detector.
struct SourceModel {
    /// Mean detected photons per pixel per frame.
    double n_mean = 1000.0;
    /// Single-photon detection efficiency, (0, 1].
    double eta0 = 1.0;
    /// Standard deviation of the signal/idler position correlation, um. FWHM = 2 sqrt(2 ln 2) sigma.
    double sigma_corr_um = 0.0;
    /// Offset of the idler partner from the ideal conjugate position (signal coordinates), um.
    std::array<double, 2> misalignment_um{0.0, 0.0};
    /// Electronic read noise, electrons RMS per pixel per frame.
    double read_noise_e = 0.0;

    /// Throws ConfigError on out-of-range fields.
    void validate() const;
};

/// One exposure of both arms.
///
/// `signal` and `mean_signal` are in signal coordinates. `idler` and `mean_idler` are stored in
/// camera geometry, i.e. point-reflected; aligned_idler() applies the single flip after which
/// correlated pixels share indices.
struct TwinFrameSet {
    IntensityFrame signal;
    IntensityFrame idler;
    IntensityMap mean_signal;
    IntensityMap mean_idler;
    std::uint64_t seed = 0;

    IntensityFrame aligned_idler() const {
        return point_reflect(idler);
    }
    IntensityMap aligned_mean_idler() const {
        return point_reflect(mean_idler);
    }
};

/// Draws one correlated signal/idler exposure.
///
/// Both mean maps are given in signal coordinates; `mean_idler` is the unperturbed (no-object)
/// intensity I0. Per pixel, pairs are Poisson with mean I0 / eta0 and each arm survives
/// independently with probability eta0. The idler partner lands at the conjugate position
/// plus misalignment plus isotropic Gaussian jitter, evaluated from a uniform sub-pixel
/// position and binned. Where the object changes the signal mean by |I - I0|, that many
/// photons are treated as deflected out of the pixel; I - I0 + |I - I0| deflected photons
/// arrive uncorrelated with the local idler. Summed over the frame, photons out equal
/// photons in and the uncorrelated fraction equals alpha_estimate(I0, I).
///
/// All per-pixel categories are independent Poisson splittings of the pair process, which
/// is exactly equivalent to sampling photons one by one. Read noise is not included; see
/// add_read_noise. The same seed always produces the same frames.
TwinFrameSet sample_twin_frames(const IntensityMap &mean_signal, const IntensityMap &mean_idler,
                                const SourceModel &source, std::uint64_t seed);

/// Signal arm only: independent Poisson counts with the given mean.
IntensityFrame sample_signal_frame(const IntensityMap &mean, std::uint64_t seed);

/// Probability that a photon starting uniformly inside a pixel of width `pitch_um` ends up
/// `offset` pixels away after a shift `delta_um` plus Gaussian jitter of std `sigma_um`.
double cell_transfer_probability(int offset, double pitch_um, double delta_um, double sigma_um);

/// Heralding efficiency for square pixels of side L:
///   eta = eta0 L^-2 * int_{LxL} dx_s int_{LxL} dx_i G_sigma(x_i + x_s + Delta)
/// with G_sigma the normalized 2-D Gaussian. The integral factorizes per axis and each axis is
/// evaluated in closed form from the antiderivative of the normal CDF.
double heralding_efficiency(double pixel_um, std::array<double, 2> delta_um, double sigma_um, double eta0);

/// eta0 for which heralding_efficiency(pixel_um, delta_um, sigma_um, eta0) == eta.
double eta0_for_heralding(double eta, double pixel_um, std::array<double, 2> delta_um, double sigma_um);

/// Moving d x d average that keeps the image size.
///
/// The window for pixel x spans [x - (ceil(d/2) - 1), x - (ceil(d/2) - 1) + d - 1] on each
/// axis; windows are clipped at the borders and averaged over the pixels they contain.
template <typename Tag>
RealMap<Tag> averaging_filter(const RealMap<Tag> &frame, int d);

/// Adds i.i.d. zero-mean Gaussian noise of std sigma_e; negative results are kept.
IntensityFrame add_read_noise(const IntensityFrame &frame, double sigma_e, std::uint64_t seed);

/// alpha = mean |I0 - Idz| / mean I0.
double alpha_estimate(const IntensityMap &focus_mean, const IntensityMap &defocus_mean);

}  // namespace tieq

#endif
