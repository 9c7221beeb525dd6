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

#include "pupilrig/pipeline.h"

#include <array>
#include <cassert>
#include <cmath>
#include <limits>

#include "pupilrig/errors.h"

namespace pupilrig {

CalibratorConfig<double> CalibrationSettings::calibrator_for(
    double d_initial) const {
  CalibratorConfig<double> c;
  c.d_initial = d_initial;
  c.thrs_variance = thrs_variance;
  c.f_influence_initial = f_influence_initial;
  c.f_annealing = f_annealing;
  c.buffer_capacity = buffer_capacity;
  c.sigma_floor = sigma_floor_fraction * d_initial;
  return c;
}

void CalibrationSettings::validate() const {
  if (!(sigma_floor_fraction >= 0) || !std::isfinite(sigma_floor_fraction)) {
    throw ConfigError("calibration sigma_floor_fraction must be >= 0");
  }
  if (!(activated_gate >= 0 && activated_gate <= 1)) {
    throw ConfigError("calibration activated_gate must lie in [0, 1]");
  }
  calibrator_for(1.0).validate();
}

void PipelineConfig::validate() const {
  index_map.validate();
  for (const auto& probe : probes.probes()) probe.validate();
  ProbeTable<double> check(probes.probes());
  calibration.validate();
  SmootherConfig<double>{smoothing.alpha}.validate();
  synth.profile.validate();
  if (synth.frame_w_px <= 0 || synth.frame_h_px <= 0) {
    throw ConfigError("synth frame dimensions must be positive");
  }
  if (!(synth.roi_scale > 0)) throw ConfigError("synth roi_scale must be > 0");
}

PipelineConfig PipelineConfig::without_filtering() const {
  PipelineConfig c = *this;
  c.calibration.calibrate_neutral = false;
  c.calibration.calibrate_activated = false;
  c.smoothing.enabled = false;
  return c;
}

std::string CalibratorId::name() const {
  return std::string(to_string(eye)) + "." + to_string(direction) + "." +
         to_string(reference);
}

Pipeline::Pipeline(PipelineConfig config)
    : config_(std::move(config)), probes_(config_.probes) {
  config_.validate();
  // Neutral calibrators first: the activated gate reads the freshly
  // calibrated neutral reference.
  for (Reference ref : {Reference::kNeutral, Reference::kActivated}) {
    const bool enabled = ref == Reference::kNeutral
                             ? config_.calibration.calibrate_neutral
                             : config_.calibration.calibrate_activated;
    if (!enabled) continue;
    for (const auto& probe : probes_.probes()) {
      const double initial =
          ref == Reference::kNeutral ? probe.d_neutral : probe.d_activated;
      calibrators_.push_back(
          {{probe.eye, probe.direction, ref},
           StandardScoreFilter<double>(config_.calibration.calibrator_for(initial))});
    }
  }
  if (config_.smoothing.enabled) {
    smoothers_.assign(3, ExponentialSmoother<double>({config_.smoothing.alpha}));
  }
}

BlendShapeFrame Pipeline::process(const FaceMesh<double>& mesh,
                                  const EyeRefinement<double>& left,
                                  const EyeRefinement<double>& right) {
  return process(merge_refinement(mesh, left, right, config_.index_map));
}

BlendShapeFrame Pipeline::process(const RefinedFaceMesh<double>& mesh) {
  BlendShapeFrame out;
  out.frame_index = frame_;

  std::array<double, 8> displacement{};
  for (const auto& probe : probes_.probes()) {
    displacement[ProbeTable<double>::slot_of(probe.eye, probe.direction)] =
        measure_displacement(mesh, probe, config_.index_map);
  }

  out.calibration.reserve(calibrators_.size());
  for (ActiveCalibrator& c : calibrators_) {
    auto& probe = probes_(c.id.eye, c.id.direction);
    const double d = displacement[ProbeTable<double>::slot_of(c.id.eye, c.id.direction)];
    CalibratorSample sample{c.id, true, {}};
    if (c.id.reference == Reference::kActivated &&
        activation(d, probe) < config_.calibration.activated_gate) {
      sample.fed = false;
      sample.step.d_current = d;
      sample.step.d_trusted = std::numeric_limits<double>::quiet_NaN();
      sample.step.d_calibrated = c.filter.d_calibrated();
      sample.step.sigma = c.filter.sigma();
      sample.step.f_influence = c.filter.f_influence();
    } else {
      sample.step = c.filter.update(d);
      probe = calibrated_probe(probe, c.id.reference, sample.step.d_calibrated);
    }
    out.calibration.push_back(sample);
  }

  for (const auto& probe : probes_.probes()) {
    out.raw(probe.eye, probe.direction) = activation(
        displacement[ProbeTable<double>::slot_of(probe.eye, probe.direction)],
        probe);
  }
  out.aggregates = merge_opposites(out.raw);
  out.coupled = couple_eyes(out.aggregates);
  if (smoothers_.empty()) {
    out.smoothed = out.coupled;
  } else {
    out.smoothed = {smoothers_[0].smooth(out.coupled.vertical),
                    smoothers_[1].smooth(out.coupled.horizontal_left),
                    smoothers_[2].smooth(out.coupled.horizontal_right)};
  }

  assert((out.raw.values.array() >= 0.0).all() &&
         (out.raw.values.array() <= 1.0).all());
  assert(std::abs(out.smoothed.vertical) <= 1.0 &&
         std::abs(out.smoothed.horizontal_left) <= 1.0 &&
         std::abs(out.smoothed.horizontal_right) <= 1.0);

  ++frame_;
  return out;
}

}  // namespace pupilrig
