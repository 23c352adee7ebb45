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

#ifndef TIEQ_FFT_H
#define TIEQ_FFT_H

#include <complex>
#include <span>

namespace tieq {

enum class FftDirection { Forward, Inverse };

/// In-place 2-D DFT of a row-major ny x nx array (x fastest).
///
/// Forward is unnormalized; Inverse divides by nx*ny so the pair round-trips. Backed by FFTW;
/// plans are cached per shape and execution is reentrant.
void fft2d(std::span<std::complex<double>> data, int nx, int ny, FftDirection direction);

}  // namespace tieq

#endif
