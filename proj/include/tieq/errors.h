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

#ifndef TIEQ_ERRORS_H
#define TIEQ_ERRORS_H

#include <stdexcept>
#include <string>

namespace tieq {

/// Invalid configuration or arguments. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// Numeric failure (NaN input, singular system, ...). The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Requested propagation distance exceeds the sampling bound of the grid.
class AliasingError : public NumericError {
   public:
    AliasingError(const std::string &what, double max_safe_dz_um)
        : NumericError(what), max_safe_dz_um_(max_safe_dz_um) {
    }
    double max_safe_dz_um() const {
        return max_safe_dz_um_;
    }

   private:
    double max_safe_dz_um_;
};

}  // namespace tieq

#endif
