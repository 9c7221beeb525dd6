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

// Analytic eyeball model that produces refined-mesh traces with known gaze.
//
// The model is linear: at gaze (gx, gy) the pupil sits at
//   eye_center + (gx * travel_x, -gy * travel_y) + neutral_bias + drift + noise
// in image coordinates (y grows downward). The eye contour is a fixed ellipse
// around the eye center, the iris ring is a circle of radius 0.4 * eye_height
// around the pupil, and the remaining face vertices sit at fixed positions
// derived from the eye layout.

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pupilrig/blendshape.h"
#include "pupilrig/mesh.h"

namespace pupilrig {

struct SubjectProfile {
  double eye_width = 0.12;
  double eye_height = 0.05;
  Eigen::Vector2d left_eye_center{0.35, 0.45};
  Eigen::Vector2d right_eye_center{0.65, 0.45};
  double pupil_travel_x = 0.035;
  double pupil_travel_y = 0.02;
  // Pupil offset at neutral gaze, image coordinates.
  Eigen::Vector2d neutral_bias{0.0, 0.0};
  // Vertical drift amplitude A: the pupil moves by A * sin(2 pi t / period)
  // along image y at frame t.
  double drift_amplitude = 0.0;
  double drift_period = 600.0;
  // Per-axis pupil noise, Gaussian truncated at 4 sigma.
  double noise_sigma = 0.001;
  double z_plane = 0.0;

  const Eigen::Vector2d& eye_center(EyeSide side) const {
    return side == EyeSide::kLeft ? left_eye_center : right_eye_center;
  }
  double iris_radius() const { return 0.4 * eye_height; }

  void validate() const;
};

// The whole face scaled by k about `pivot`: eye geometry, travels, bias,
// drift and noise.
SubjectProfile scaled_profile(const SubjectProfile& profile, double k,
                              const Eigen::Vector2d& pivot = {0.5, 0.5});

struct GazeSample {
  double gx = 0.0;  // +1 = image right
  double gy = 0.0;  // +1 = up
  friend bool operator==(const GazeSample&, const GazeSample&) = default;
};

struct SynthFrame {
  RefinedFaceMesh<double> mesh;
  GazeSample truth;
  std::size_t frame_index = 0;
};

/// Frame-at-a-time generator. Deterministic given (profile, seed, index map).
class TraceGenerator {
 public:
  TraceGenerator(SubjectProfile profile, std::uint64_t seed,
                 EyeIndexMap index_map = EyeIndexMap::mediapipe_default());

  SynthFrame next(const GazeSample& gaze);

  // Noise-free pupil center of one eye at the given gaze and frame.
  Eigen::Vector2d pupil_center(EyeSide side, const GazeSample& gaze,
                               std::size_t frame) const;

  const SubjectProfile& profile() const { return profile_; }
  std::size_t frame_index() const { return frame_; }

 private:
  double truncated_normal();

  SubjectProfile profile_;
  EyeIndexMap index_map_;
  RefinedFaceMesh<double>::Vertices base_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::size_t frame_ = 0;
};

std::vector<SynthFrame> generate_trace(
    const SubjectProfile& profile, std::span<const GazeSample> signal,
    std::uint64_t seed,
    const EyeIndexMap& index_map = EyeIndexMap::mediapipe_default());

/// Probe table for the generator's topology: inward/outward against the
/// inner/outer corner along the eye axis, upward/downward against the
/// lower/upper lid midpoint along the eye normal. References are the
/// displacements of `profile` at neutral and full gaze.
ProbeTable<double> default_probe_table(
    const EyeIndexMap& index_map = EyeIndexMap::mediapipe_default(),
    const SubjectProfile& profile = {},
    Normalizer normalizer = Normalizer::kEyeWidth);

/// Expected coupled coefficients computed in closed form from the eyeball
/// model, assuming the vertex pairs of default_probe_table with the
/// references and normalizers of `probes`. Noise and drift are ignored;
/// neutral_bias is honored.
CoupledBlendShapes<double> oracle_blendshapes(const SubjectProfile& profile,
                                              const GazeSample& truth,
                                              const ProbeTable<double>& probes);
CoupledBlendShapes<double> oracle_blendshapes(const SubjectProfile& profile,
                                              const GazeSample& truth);

/// A refined mesh decomposed into the coarse face mesh plus per-eye
/// refinement output, as a face-mesh + eye-network pair would produce it.
struct SplitFrame {
  FaceMesh<double> mesh;
  EyeRefinement<double> left;
  EyeRefinement<double> right;
};

// The coarse contour is pulled 5% toward the eye center so that merging the
// refinement visibly changes it.
SplitFrame split_frame(const RefinedFaceMesh<double>& refined,
                       const EyeIndexMap& index_map, long frame_w_px,
                       long frame_h_px, double roi_scale = 1.0);

/// Gaze signal from a short spec string:
///   neutral | const:GX,GY | grid:N | sinusoid:PERIOD | saccade:HOLD
/// grid:N walks an N x N grid over [-1, 1]^2 (frames = 0 means one pass).
std::vector<GazeSample> make_signal(const std::string& spec,
                                    std::size_t frames, std::uint64_t seed);

}  // namespace pupilrig
