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

// Online recalibration of a reference displacement with a standard score
// filter.
//
// Every incoming displacement is compared against the mean of a circular
// buffer of trusted displacements. Samples within thrs_variance standard
// deviations are trusted as-is; others are pulled toward the mean by the
// influence factor, which anneals to zero so that late outliers insert the
// mean itself. The calibrated reference is the buffer mean.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>

#include "pupilrig/blendshape.h"
#include "pupilrig/errors.h"

namespace pupilrig {

template <typename Scalar>
struct CalibratorConfig {
  Scalar d_initial = Scalar(1);
  Scalar thrs_variance = Scalar(2);
  Scalar f_influence_initial = Scalar(0.5);
  Scalar f_annealing = Scalar(0.01);
  std::size_t buffer_capacity = 100;
  // Lower bound on the interval's standard deviation; 5% of d_initial when
  // unset.
  std::optional<Scalar> sigma_floor;

  Scalar effective_sigma_floor() const {
    return sigma_floor ? *sigma_floor : Scalar(0.05) * d_initial;
  }

  void validate() const {
    if (!(d_initial > 0) || !std::isfinite(d_initial)) {
      throw ConfigError("calibrator d_initial must be > 0");
    }
    if (!(thrs_variance > 0) || !std::isfinite(thrs_variance)) {
      throw ConfigError("calibrator thrs_variance must be > 0");
    }
    if (!(f_influence_initial >= 0 && f_influence_initial <= 1)) {
      throw ConfigError("calibrator f_influence must lie in [0, 1]");
    }
    if (!(f_annealing >= 0) || !std::isfinite(f_annealing)) {
      throw ConfigError("calibrator f_annealing must be >= 0");
    }
    if (buffer_capacity < 2) {
      throw ConfigError("calibrator buffer capacity must be >= 2");
    }
    const Scalar floor = effective_sigma_floor();
    if (!(floor >= 0) || !std::isfinite(floor)) {
      throw ConfigError("calibrator sigma_floor must be >= 0");
    }
  }
};

/// Fixed-capacity ring of scalars; the oldest sample is evicted when full.
template <typename Scalar>
class RingBuffer {
 public:
  explicit RingBuffer(std::size_t capacity)
      : data_(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(
            static_cast<Eigen::Index>(capacity))) {}

  void push(Scalar value) {
    data_(static_cast<Eigen::Index>(next_)) = value;
    next_ = (next_ + 1) % capacity();
    size_ = std::min(size_ + 1, capacity());
  }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return static_cast<std::size_t>(data_.size()); }
  bool empty() const { return size_ == 0; }

  // Stored samples in storage order (chronological until the first wrap).
  auto values() const { return data_.head(static_cast<Eigen::Index>(size_)); }

  // Shifted by a stored sample, so a constant buffer averages exactly.
  Scalar mean() const {
    const Scalar shift = data_(0);
    return shift + (values().array() - shift).mean();
  }

  // Population standard deviation.
  Scalar stddev() const {
    const Scalar m = mean();
    return std::sqrt((values().array() - m).square().mean());
  }

  Scalar min() const { return values().minCoeff(); }
  Scalar max() const { return values().maxCoeff(); }

 private:
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> data_;
  std::size_t next_ = 0;
  std::size_t size_ = 0;
};

template <typename Scalar>
struct CalibrationStep {
  Scalar d_current = Scalar(0);
  Scalar d_trusted = Scalar(0);
  Scalar d_calibrated = Scalar(0);
  // State after the update.
  Scalar sigma = Scalar(0);
  Scalar f_influence = Scalar(0);
  bool accepted = false;
};

/// Calibrator state. Single owner; updates must be serialized.
template <typename Scalar>
class StandardScoreFilter {
 public:
  explicit StandardScoreFilter(CalibratorConfig<Scalar> config)
      : config_(validated(std::move(config))),
        trusted_(config_.buffer_capacity),
        f_influence_(config_.f_influence_initial),
        d_mean_(config_.d_initial),
        sigma_(config_.effective_sigma_floor()) {
    trusted_.push(config_.d_initial);
  }

  CalibrationStep<Scalar> update(Scalar d_current) {
    if (!std::isfinite(d_current) || d_current < 0) {
      throw ArgumentError("calibrator input must be finite and >= 0");
    }
    CalibrationStep<Scalar> step;
    step.d_current = d_current;

    const Scalar diff = d_current - d_mean_;
    const Scalar half_width = config_.thrs_variance * sigma_;
    step.accepted = std::abs(diff) <= half_width;
    if (step.accepted) {
      step.d_trusted = d_current;
    } else {
      const Scalar alpha = f_influence_;
      const Scalar beta = Scalar(1) - f_influence_;
      step.d_trusted = alpha * d_current + beta * d_mean_;
    }
    trusted_.push(step.d_trusted);

    f_influence_ = std::max(Scalar(0), f_influence_ - config_.f_annealing);
    d_mean_ = trusted_.mean();
    sigma_ = std::max(trusted_.stddev(), config_.effective_sigma_floor());

    step.d_calibrated = d_mean_;
    step.sigma = sigma_;
    step.f_influence = f_influence_;
    return step;
  }

  Scalar d_calibrated() const { return d_mean_; }
  Scalar d_mean() const { return d_mean_; }
  Scalar sigma() const { return sigma_; }
  Scalar f_influence() const { return f_influence_; }
  const RingBuffer<Scalar>& trusted() const { return trusted_; }
  const CalibratorConfig<Scalar>& config() const { return config_; }

 private:
  static CalibratorConfig<Scalar> validated(CalibratorConfig<Scalar> c) {
    c.validate();
    return c;
  }

  CalibratorConfig<Scalar> config_;
  RingBuffer<Scalar> trusted_;
  Scalar f_influence_;
  Scalar d_mean_;
  Scalar sigma_;
};

enum class Reference { kNeutral, kActivated };

inline const char* to_string(Reference r) {
  return r == Reference::kNeutral ? "neutral" : "activated";
}

// Copy of `probe` with one reference displacement replaced.
template <typename Scalar>
DisplacementProbe<Scalar> calibrated_probe(DisplacementProbe<Scalar> probe,
                                           Reference which,
                                           Scalar d_calibrated) {
  (which == Reference::kNeutral ? probe.d_neutral : probe.d_activated) =
      d_calibrated;
  probe.validate();
  return probe;
}

}  // namespace pupilrig
