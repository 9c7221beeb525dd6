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

// Frame-by-frame composition of the blend shape stages:
//   [merge refinement] -> measure -> calibrate -> activation -> merge
//   opposites -> couple eyes -> smooth

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pupilrig/blendshape.h"
#include "pupilrig/calibration.h"
#include "pupilrig/mesh.h"
#include "pupilrig/smoothing.h"
#include "pupilrig/synth.h"

namespace pupilrig {

struct CalibrationSettings {
  bool calibrate_neutral = true;
  bool calibrate_activated = false;
  double thrs_variance = 2.0;
  double f_influence_initial = 0.5;
  double f_annealing = 0.01;
  std::size_t buffer_capacity = 100;
  // sigma_floor = sigma_floor_fraction * d_initial for every calibrator.
  double sigma_floor_fraction = 0.05;
  // An activated-reference calibrator only sees frames whose activation
  // (against the current references) reaches this value.
  double activated_gate = 0.9;

  CalibratorConfig<double> calibrator_for(double d_initial) const;
  void validate() const;
};

struct SmoothingSettings {
  bool enabled = true;
  double alpha = 0.5;
};

// Settings used only when generating synthetic traces.
struct SynthSettings {
  SubjectProfile profile;
  long frame_w_px = 640;
  long frame_h_px = 480;
  double roi_scale = 1.0;
};

struct PipelineConfig {
  EyeIndexMap index_map = EyeIndexMap::mediapipe_default();
  ProbeTable<double> probes = default_probe_table();
  CalibrationSettings calibration;
  SmoothingSettings smoothing;
  SynthSettings synth;

  void validate() const;

  // Same config with calibration and smoothing switched off.
  PipelineConfig without_filtering() const;
};

struct CalibratorId {
  EyeSide eye = EyeSide::kLeft;
  Direction direction = Direction::kOutward;
  Reference reference = Reference::kNeutral;

  std::string name() const;
  friend bool operator==(const CalibratorId&, const CalibratorId&) = default;
};

struct CalibratorSample {
  CalibratorId id;
  // False when the calibrator was skipped this frame (activated gate).
  bool fed = false;
  CalibrationStep<double> step;
};

struct BlendShapeFrame {
  std::size_t frame_index = 0;
  RawActivations<double> raw;
  AggregateBlendShapes<double> aggregates;
  CoupledBlendShapes<double> coupled;
  CoupledBlendShapes<double> smoothed;
  std::vector<CalibratorSample> calibration;
};

/// One pipeline instance per trace. Frames must arrive in order.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  BlendShapeFrame process(const RefinedFaceMesh<double>& mesh);
  BlendShapeFrame process(const FaceMesh<double>& mesh,
                          const EyeRefinement<double>& left,
                          const EyeRefinement<double>& right);

  const PipelineConfig& config() const { return config_; }
  // Probe table after the latest calibration updates.
  const ProbeTable<double>& current_probes() const { return probes_; }
  std::size_t frames_processed() const { return frame_; }

 private:
  struct ActiveCalibrator {
    CalibratorId id;
    StandardScoreFilter<double> filter;
  };

  PipelineConfig config_;
  ProbeTable<double> probes_;
  std::vector<ActiveCalibrator> calibrators_;
  std::vector<ExponentialSmoother<double>> smoothers_;
  std::size_t frame_ = 0;
};

}  // namespace pupilrig
