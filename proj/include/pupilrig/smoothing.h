// Copyright 2026 The PupilRig Authors.
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

#pragma once

#include <cmath>
#include <optional>

#include "pupilrig/errors.h"

namespace pupilrig {

template <typename Scalar>
struct SmootherConfig {
  // Weight of the incoming sample.
  Scalar alpha = Scalar(0.5);

  void validate() const {
    if (!(alpha > 0 && alpha <= 1)) {
      throw ConfigError("smoother alpha must lie in (0, 1]");
    }
  }
};

/// Exponential moving average over a frame-indexed stream. The first sample
/// passes through unchanged.
template <typename Scalar>
class ExponentialSmoother {
 public:
  explicit ExponentialSmoother(SmootherConfig<Scalar> config = {})
      : config_(config) {
    config_.validate();
  }

  Scalar smooth(Scalar value) {
    if (!std::isfinite(value)) throw ArgumentError("non-finite sample");
    if (!last_) {
      last_ = value;
    } else {
      last_ = config_.alpha * value + (Scalar(1) - config_.alpha) * *last_;
    }
    return *last_;
  }

  const std::optional<Scalar>& last() const { return last_; }
  const SmootherConfig<Scalar>& config() const { return config_; }
  void reset() { last_.reset(); }

 private:
  SmootherConfig<Scalar> config_;
  std::optional<Scalar> last_;
};

}  // namespace pupilrig
