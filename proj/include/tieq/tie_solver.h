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

#ifndef TIEQ_TIE_SOLVER_H
#define TIEQ_TIE_SOLVER_H

#include <span>
#include <vector>

#include "tieq/grid.h"
#include "tieq/photon_stats.h"

namespace tieq {

struct TieOptions {
    double dz_um = 0.0;
    /// Wavenumber 2*pi/lambda, rad/um.
    double k_wave = 0.0;
    /// Tikhonov weight; the denominator becomes |q|^2 + eps * q_ref^2 with q_ref = 1/(nx*pitch).
    double regularization_eps = 0.0;
    /// Only the uniform-intensity form I0 * laplacian(phi) is implemented.
    bool use_uniform_approx = true;
    /// In-focus intensity I0, photons per pixel.
    double illum_mean = 0.0;

    void validate() const;
};

struct QuantumCorrection {
    double k_factor = 0.0;
    bool enabled = false;
};

/// (I+ - I-) / (2 dz).
DerivativeMap axial_derivative(const IntensityFrame &plus, const IntensityFrame &minus, double dz_um);

/// Inverts -k dI/dz = I0 laplacian(phi) with an FFT Poisson solve.
///
/// q is measured in cycles/um, so phi~(q) = k dI~(q) / (4 pi^2 I0 (|q|^2 + eps q_ref^2)) and
/// phi~(0) = 0. The derivative map is mirror-extended to 2nx x 2ny before the transform
/// (even symmetry, i.e. zero-flux borders) and the solution is cropped back. The returned
/// map has zero spatial mean.
PhaseMap solve_tie(const DerivativeMap &didz, const TieOptions &options);

/// signal - k (idler - idler_mean), with the idler already in signal coordinates. The
/// residual fluctuation is dI_s - k dI_i, the quantity minimized by estimate_k_opt.
IntensityFrame quantum_subtract(const IntensityFrame &signal, const IntensityFrame &idler,
                                const IntensityMap &idler_mean, const QuantumCorrection &correction);

/// Per-pixel variant of quantum_subtract with k given as a map.
IntensityFrame quantum_subtract(const IntensityFrame &signal, const IntensityFrame &idler,
                                const IntensityMap &idler_mean, const IntensityMap &k_map);

struct KOptEstimate {
    /// <dI_s dI_i> / <dI_i^2> per pixel.
    IntensityMap per_pixel;
    /// Ratio of the spatially averaged covariance and variance.
    double scalar = 0.0;
};

/// Empirical optimal subtraction gain from paired frames (idlers already aligned).
/// Throws ConfigError with fewer than two frames.
KOptEstimate estimate_k_opt(std::span<const IntensityFrame> signal, std::span<const IntensityFrame> idler);

/// Convenience overload: flips each idler and applies the d x d averaging filter to both arms.
KOptEstimate estimate_k_opt(std::span<const TwinFrameSet> calibration, int filter_size = 1);

/// 1 - (1 - alpha)^2 eta^2.
double predicted_noise_reduction(double eta, double alpha);

/// Predicted |phi~_noise(q)| = k sigma / (4 pi^2 sqrt(2) I0 dz |q|^2) on the FFT frequencies of
/// `grid`, for white intensity noise of std sigma_flat in each plane; zero at q = 0.
std::vector<double> noise_artifact_spectrum(double sigma_flat, const TieOptions &options, const Grid &grid);

struct SpectrumBin {
    double q = 0.0;
    double power = 0.0;
    int count = 0;
};

/// Azimuthally averaged |FFT|^2 of a phase map on its mirror-extended (2nx x 2ny) domain, in
/// rings of width 1/(2 nx pitch). The DC bin is omitted.
std::vector<SpectrumBin> radial_power_spectrum(const PhaseMap &phase);

}  // namespace tieq

#endif
