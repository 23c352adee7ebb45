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

#include "tieq/fft.h"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "tieq/errors.h"

namespace tieq {
namespace {

// FFTW planning is not thread safe; execution of an existing plan on new arrays is.
class PlanCache {
   public:
    ~PlanCache() {
        for (auto &[key, plan] : plans_) {
            fftw_destroy_plan(plan);
        }
    }

    fftw_plan get(int nx, int ny, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_tuple(nx, ny, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) {
            return it->second;
        }
        std::vector<std::complex<double>> scratch(static_cast<size_t>(nx) * ny);
        auto *buf = reinterpret_cast<fftw_complex *>(scratch.data());
        fftw_plan plan = fftw_plan_dft_2d(ny, nx, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (plan == nullptr) {
            throw NumericError("FFTW failed to create a plan");
        }
        plans_.emplace(key, plan);
        return plan;
    }

   private:
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache &plan_cache() {
    static PlanCache cache;
    return cache;
}

}  // namespace

void fft2d(std::span<std::complex<double>> data, int nx, int ny, FftDirection direction) {
    if (data.size() != static_cast<size_t>(nx) * static_cast<size_t>(ny)) {
        throw ConfigError("fft2d: buffer size does not match shape");
    }
    int sign = direction == FftDirection::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
    fftw_plan plan = plan_cache().get(nx, ny, sign);
    auto *buf = reinterpret_cast<fftw_complex *>(data.data());
    fftw_execute_dft(plan, buf, buf);
    if (direction == FftDirection::Inverse) {
        double scale = 1.0 / static_cast<double>(data.size());
        for (auto &v : data) {
            v *= scale;
        }
    }
}

}  // namespace tieq
