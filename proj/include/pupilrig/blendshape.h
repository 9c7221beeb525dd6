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

// Displacement-based pupil blend shapes.
//
// Each of the four pupil directions of each eye is driven by one vertex pair
// of the refined mesh. The pair's displacement is mapped linearly onto [0, 1]
// between a neutral and an activated reference displacement. Opposite
// directions are then merged into signed horizontal/vertical coefficients and
// the two eyes are coupled.
//
// Sign conventions: vertical +1 is "looking up"; horizontal +1 is "pupil
// toward image right" for both eyes.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "pupilrig/errors.h"
#include "pupilrig/mesh.h"

namespace pupilrig {

enum class Direction { kOutward = 0, kInward = 1, kUpward = 2, kDownward = 3 };

inline constexpr std::array<Direction, 4> kDirections = {
    Direction::kOutward, Direction::kInward, Direction::kUpward,
    Direction::kDownward};
inline constexpr std::array<EyeSide, 2> kEyes = {EyeSide::kLeft,
                                                 EyeSide::kRight};

inline const char* to_string(Direction d) {
  switch (d) {
    case Direction::kOutward: return "outward";
    case Direction::kInward: return "inward";
    case Direction::kUpward: return "upward";
    case Direction::kDownward: return "downward";
  }
  return "?";
}

enum class Normalizer { kNone, kEyeWidth };

// How the vertex pair is turned into a scalar displacement. kPlanar is the
// plain x,y distance. The eye-axis variants measure the absolute component of
// (b - a) along the corner-to-corner axis of the probe's eye, or along its
// in-plane normal, so horizontal and vertical gaze do not leak into each
// other.
enum class ProbeAxis { kPlanar, kEyeHorizontal, kEyeVertical };

template <typename Scalar>
struct DisplacementProbe {
  EyeSide eye = EyeSide::kLeft;
  Direction direction = Direction::kOutward;
  Eigen::Index vertex_a = 0;
  Eigen::Index vertex_b = 1;
  Scalar d_neutral = Scalar(0);
  Scalar d_activated = Scalar(1);
  Normalizer normalizer = Normalizer::kEyeWidth;
  ProbeAxis axis = ProbeAxis::kPlanar;

  std::string name() const {
    return std::string(to_string(eye)) + "." + to_string(direction);
  }

  void validate() const {
    if (vertex_a < 0 || vertex_a >= kRefinedMeshSize || vertex_b < 0 ||
        vertex_b >= kRefinedMeshSize) {
      throw ConfigError(name() + ": vertex index outside the refined mesh");
    }
    if (vertex_a == vertex_b) {
      throw ConfigError(name() + ": probe vertices must differ");
    }
    if (!std::isfinite(d_neutral) || !std::isfinite(d_activated) ||
        d_neutral < 0 || d_activated < 0) {
      throw ConfigError(name() +
                        ": reference displacements must be finite and >= 0");
    }
    if (d_neutral == d_activated) {
      throw ConfigError(name() + ": degenerate probe (d_neutral == d_activated)");
    }
  }

  friend bool operator==(const DisplacementProbe&,
                         const DisplacementProbe&) = default;
};

/// Exactly one probe per (eye, direction).
template <typename Scalar>
class ProbeTable {
 public:
  using Probe = DisplacementProbe<Scalar>;

  ProbeTable() = default;

  explicit ProbeTable(std::span<const Probe> probes) {
    std::array<bool, 8> seen{};
    for (const Probe& probe : probes) {
      probe.validate();
      const std::size_t slot = slot_of(probe.eye, probe.direction);
      if (seen[slot]) throw ConfigError("duplicate probe " + probe.name());
      seen[slot] = true;
      probes_[slot] = probe;
    }
    for (EyeSide eye : kEyes) {
      for (Direction d : kDirections) {
        if (!seen[slot_of(eye, d)]) {
          throw ConfigError(std::string("missing probe ") + to_string(eye) +
                            "." + to_string(d));
        }
      }
    }
  }

  const Probe& operator()(EyeSide eye, Direction d) const {
    return probes_[slot_of(eye, d)];
  }
  Probe& operator()(EyeSide eye, Direction d) {
    return probes_[slot_of(eye, d)];
  }

  const std::array<Probe, 8>& probes() const { return probes_; }

  friend bool operator==(const ProbeTable&, const ProbeTable&) = default;

  static std::size_t slot_of(EyeSide eye, Direction d) {
    return static_cast<std::size_t>(eye) * 4 + static_cast<std::size_t>(d);
  }

 private:
  std::array<Probe, 8> probes_{};
};

/// Per-eye, per-direction activations in [0, 1]. Rows are Direction, columns
/// are EyeSide.
template <typename Scalar>
struct RawActivations {
  Eigen::Matrix<Scalar, 4, 2> values = Eigen::Matrix<Scalar, 4, 2>::Zero();

  Scalar operator()(EyeSide eye, Direction d) const {
    return values(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(eye));
  }
  Scalar& operator()(EyeSide eye, Direction d) {
    return values(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(eye));
  }
};

template <typename Scalar>
struct EyeAggregate {
  Scalar horizontal = Scalar(0);
  Scalar vertical = Scalar(0);
  friend bool operator==(const EyeAggregate&, const EyeAggregate&) = default;
};

template <typename Scalar>
struct AggregateBlendShapes {
  EyeAggregate<Scalar> left;
  EyeAggregate<Scalar> right;
  friend bool operator==(const AggregateBlendShapes&,
                         const AggregateBlendShapes&) = default;
};

template <typename Scalar>
struct CoupledBlendShapes {
  Scalar vertical = Scalar(0);
  Scalar horizontal_left = Scalar(0);
  Scalar horizontal_right = Scalar(0);

  // View as per-eye aggregates, e.g. to feed back into couple_eyes.
  AggregateBlendShapes<Scalar> as_aggregates() const {
    return {{horizontal_left, vertical}, {horizontal_right, vertical}};
  }

  friend bool operator==(const CoupledBlendShapes&,
                         const CoupledBlendShapes&) = default;
};

namespace detail {

template <typename Scalar>
Scalar eye_width_of(const RefinedFaceMesh<Scalar>& mesh, const EyeIndices& eye,
                    Landmark2<Scalar>* axis) {
  const Landmark2<Scalar> span =
      mesh.xy(eye.inner_corner) - mesh.xy(eye.outer_corner);
  const Scalar width = span.norm();
  if (!(width >= Scalar(1e-9))) {
    throw GeometryError("eye corner distance below 1e-9");
  }
  if (axis != nullptr) *axis = span / width;
  return width;
}

}  // namespace detail

/// Displacement between the probe's two vertices, optionally divided by the
/// width of the probe's eye (inner to outer corner).
template <typename Scalar>
Scalar measure_displacement(const RefinedFaceMesh<Scalar>& mesh,
                            const DisplacementProbe<Scalar>& probe,
                            const EyeIndexMap& index_map) {
  const Landmark2<Scalar> delta = mesh.xy(probe.vertex_b) - mesh.xy(probe.vertex_a);
  const EyeIndices& eye = index_map[probe.eye];

  Scalar d;
  std::optional<Scalar> width;
  if (probe.axis == ProbeAxis::kPlanar) {
    d = delta.norm();
  } else {
    Landmark2<Scalar> axis;
    width = detail::eye_width_of(mesh, eye, &axis);
    if (probe.axis == ProbeAxis::kEyeHorizontal) {
      d = std::abs(delta.dot(axis));
    } else {
      const Landmark2<Scalar> normal(-axis.y(), axis.x());
      d = std::abs(delta.dot(normal));
    }
  }
  if (probe.normalizer == Normalizer::kEyeWidth) {
    if (!width) width = detail::eye_width_of<Scalar>(mesh, eye, nullptr);
    d /= *width;
  }
  return d;
}

/// Maps d_current linearly so that d_neutral -> 0 and d_activated -> 1, then
/// clips to [0, 1]. Works for either ordering of the references.
template <typename Scalar>
Scalar activation(Scalar d_current, Scalar d_neutral, Scalar d_activated) {
  if (d_neutral == d_activated) {
    throw ConfigError("degenerate probe (d_neutral == d_activated)");
  }
  const Scalar lo = std::min(d_neutral, d_activated);
  const Scalar hi = std::max(d_neutral, d_activated);
  Scalar t = (d_current - lo) / (hi - lo);
  if (d_activated < d_neutral) t = Scalar(1) - t;
  return std::clamp(t, Scalar(0), Scalar(1));
}

template <typename Scalar>
Scalar activation(Scalar d_current, const DisplacementProbe<Scalar>& probe) {
  return activation(d_current, probe.d_neutral, probe.d_activated);
}

template <typename Scalar>
RawActivations<Scalar> raw_activations(const RefinedFaceMesh<Scalar>& mesh,
                                       const ProbeTable<Scalar>& probes,
                                       const EyeIndexMap& index_map) {
  RawActivations<Scalar> raw;
  for (const auto& probe : probes.probes()) {
    raw(probe.eye, probe.direction) =
        activation(measure_displacement(mesh, probe, index_map), probe);
  }
  return raw;
}

template <typename Scalar>
AggregateBlendShapes<Scalar> merge_opposites(const RawActivations<Scalar>& raw) {
  auto merge = [&](EyeSide eye) {
    const Scalar out = raw(eye, Direction::kOutward);
    const Scalar in = raw(eye, Direction::kInward);
    // Outward points to image-left for the left eye.
    const Scalar horizontal = eye == EyeSide::kRight ? out - in : in - out;
    return EyeAggregate<Scalar>{
        horizontal, raw(eye, Direction::kUpward) - raw(eye, Direction::kDownward)};
  };
  return {merge(EyeSide::kLeft), merge(EyeSide::kRight)};
}

/// Vertical values are averaged. Horizontal magnitudes are averaged and each
/// eye keeps its own sign, so convergent gaze survives coupling. sign(0) = +.
template <typename Scalar>
CoupledBlendShapes<Scalar> couple_eyes(const AggregateBlendShapes<Scalar>& agg) {
  const Scalar half(0.5);
  const Scalar magnitude =
      half * (std::abs(agg.left.horizontal) + std::abs(agg.right.horizontal));
  auto signed_magnitude = [&](Scalar h) {
    return h < Scalar(0) ? -magnitude : magnitude;
  };
  return {half * (agg.left.vertical + agg.right.vertical),
          signed_magnitude(agg.left.horizontal),
          signed_magnitude(agg.right.horizontal)};
}

}  // namespace pupilrig
