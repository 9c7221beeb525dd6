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

#include "pupilrig/synth.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>

#include "pupilrig/errors.h"

namespace pupilrig {
namespace {

// +1 when "outward" points to image right.
double outward_sign(EyeSide side) { return side == EyeSide::kRight ? 1.0 : -1.0; }

// Unit-ellipse point k of kContourSize, exact at the four extremes.
Eigen::Vector2d contour_direction(Eigen::Index k) {
  switch (k) {
    case 0: return {1.0, 0.0};
    case 4: return {0.0, 1.0};
    case 8: return {-1.0, 0.0};
    case 12: return {0.0, -1.0};
    default: break;
  }
  const double theta =
      2.0 * std::numbers::pi * static_cast<double>(k) / kContourSize;
  return {std::cos(theta), std::sin(theta)};
}

double quantize(double v) { return std::round(v * 1000.0) / 1000.0; }

void check_gaze(const GazeSample& g) {
  if (!(std::abs(g.gx) <= 1.0) || !(std::abs(g.gy) <= 1.0)) {
    throw ArgumentError("gaze components must lie in [-1, 1]");
  }
}

}  // namespace

void SubjectProfile::validate() const {
  if (!(eye_width > 0) || !(eye_height > 0)) {
    throw ConfigError("profile eye_width and eye_height must be > 0");
  }
  if (!(pupil_travel_x > 0) || !(pupil_travel_y > 0)) {
    throw ConfigError("profile pupil travels must be > 0");
  }
  if (!(noise_sigma >= 0)) throw ConfigError("profile noise_sigma must be >= 0");
  if (!(drift_period > 0)) throw ConfigError("profile drift_period must be > 0");
  if (!left_eye_center.allFinite() || !right_eye_center.allFinite() ||
      !neutral_bias.allFinite() || !std::isfinite(drift_amplitude) ||
      !std::isfinite(z_plane)) {
    throw ConfigError("profile values must be finite");
  }
}

SubjectProfile scaled_profile(const SubjectProfile& profile, double k,
                              const Eigen::Vector2d& pivot) {
  if (!(k > 0)) throw ArgumentError("scale factor must be > 0");
  SubjectProfile out = profile;
  out.eye_width *= k;
  out.eye_height *= k;
  out.left_eye_center = pivot + k * (profile.left_eye_center - pivot);
  out.right_eye_center = pivot + k * (profile.right_eye_center - pivot);
  out.pupil_travel_x *= k;
  out.pupil_travel_y *= k;
  out.neutral_bias *= k;
  out.drift_amplitude *= k;
  out.noise_sigma *= k;
  return out;
}

TraceGenerator::TraceGenerator(SubjectProfile profile, std::uint64_t seed,
                               EyeIndexMap index_map)
    : profile_(std::move(profile)),
      index_map_(std::move(index_map)),
      base_(3, kRefinedMeshSize),
      rng_(seed) {
  profile_.validate();
  index_map_.validate();

  std::set<Eigen::Index> eye_vertices;
  for (EyeSide side : kEyes) {
    const EyeIndices& eye = index_map_[side];
    eye_vertices.insert(eye.contour.begin(), eye.contour.end());
    eye_vertices.insert(eye.eye_center);
  }

  // Remaining face vertices on a sunflower spiral filling an oval below and
  // around the eyes, scaled with the inter-eye distance.
  const Eigen::Vector2d mid =
      0.5 * (profile_.left_eye_center + profile_.right_eye_center);
  const double ied = (profile_.right_eye_center - profile_.left_eye_center).norm();
  const Eigen::Vector2d face_center = mid + Eigen::Vector2d(0.0, 0.3 * ied);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const auto n_face =
      static_cast<double>(kFaceMeshSize - static_cast<Eigen::Index>(eye_vertices.size()));
  double j = 0.0;
  for (Eigen::Index i = 0; i < kFaceMeshSize; ++i) {
    if (eye_vertices.count(i) != 0) continue;
    const double r = std::sqrt((j + 0.5) / n_face);
    const double theta = j * golden;
    base_(0, i) = quantize(face_center.x() + 0.85 * ied * r * std::cos(theta));
    base_(1, i) = quantize(face_center.y() + 1.15 * ied * r * std::sin(theta));
    base_(2, i) = profile_.z_plane;
    j += 1.0;
  }

  for (EyeSide side : kEyes) {
    const EyeIndices& eye = index_map_[side];
    const Eigen::Vector2d& c = profile_.eye_center(side);
    const double o = outward_sign(side);
    for (Eigen::Index k = 0; k < kContourSize; ++k) {
      const Eigen::Vector2d u = contour_direction(k);
      const Eigen::Index v = eye.contour[static_cast<std::size_t>(k)];
      base_(0, v) = c.x() + o * u.x() * (0.5 * profile_.eye_width);
      base_(1, v) = c.y() + u.y() * (0.5 * profile_.eye_height);
      base_(2, v) = profile_.z_plane;
    }
    base_.col(eye.eye_center) << c.x(), c.y(), profile_.z_plane;
  }
  base_.rightCols(2 * kIrisSize).setZero();
}

double TraceGenerator::truncated_normal() {
  double n;
  do {
    n = normal_(rng_);
  } while (std::abs(n) > 4.0);
  return n;
}

Eigen::Vector2d TraceGenerator::pupil_center(EyeSide side,
                                             const GazeSample& gaze,
                                             std::size_t frame) const {
  const double drift =
      profile_.drift_amplitude *
      std::sin(2.0 * std::numbers::pi * static_cast<double>(frame) /
               profile_.drift_period);
  return profile_.eye_center(side) +
         Eigen::Vector2d(gaze.gx * profile_.pupil_travel_x,
                         -gaze.gy * profile_.pupil_travel_y) +
         profile_.neutral_bias + Eigen::Vector2d(0.0, drift);
}

SynthFrame TraceGenerator::next(const GazeSample& gaze) {
  check_gaze(gaze);
  RefinedFaceMesh<double>::Vertices v = base_;
  const double r = profile_.iris_radius();
  for (EyeSide side : kEyes) {
    Eigen::Vector2d p = pupil_center(side, gaze, frame_);
    const double nx = truncated_normal();
    const double ny = truncated_normal();
    if (profile_.noise_sigma > 0) {
      p += profile_.noise_sigma * Eigen::Vector2d(nx, ny);
    }
    // Iris ring in the subject's anatomical frame: the subject's right is
    // image left.
    const std::array<Eigen::Vector2d, kIrisSize> ring = {
        p, p + Eigen::Vector2d(-r, 0.0), p + Eigen::Vector2d(0.0, -r),
        p + Eigen::Vector2d(r, 0.0), p + Eigen::Vector2d(0.0, r)};
    for (Eigen::Index k = 0; k < kIrisSize; ++k) {
      const Eigen::Index col = iris_index(side, static_cast<IrisPoint>(k));
      v.col(col) << ring[static_cast<std::size_t>(k)], profile_.z_plane;
    }
  }
  SynthFrame frame{RefinedFaceMesh<double>(std::move(v)), gaze, frame_};
  ++frame_;
  return frame;
}

std::vector<SynthFrame> generate_trace(const SubjectProfile& profile,
                                       std::span<const GazeSample> signal,
                                       std::uint64_t seed,
                                       const EyeIndexMap& index_map) {
  if (signal.empty()) throw ArgumentError("gaze signal is empty");
  TraceGenerator gen(profile, seed, index_map);
  std::vector<SynthFrame> frames;
  frames.reserve(signal.size());
  for (const GazeSample& g : signal) frames.push_back(gen.next(g));
  return frames;
}

ProbeTable<double> default_probe_table(const EyeIndexMap& index_map,
                                       const SubjectProfile& profile,
                                       Normalizer normalizer) {
  index_map.validate();
  profile.validate();
  const double unit = normalizer == Normalizer::kEyeWidth ? profile.eye_width : 1.0;
  const double half_w = 0.5 * profile.eye_width;
  const double half_h = 0.5 * profile.eye_height;

  std::vector<DisplacementProbe<double>> probes;
  for (EyeSide side : kEyes) {
    const EyeIndices& eye = index_map[side];
    const Eigen::Index pupil = iris_index(side, IrisPoint::kCenter);
    auto add = [&](Direction d, Eigen::Index other, ProbeAxis axis,
                   double neutral, double activated) {
      probes.push_back({side, d, pupil, other, neutral / unit, activated / unit,
                        normalizer, axis});
    };
    // Moving toward a corner shrinks the distance to it; moving up grows the
    // distance to the lower lid.
    add(Direction::kOutward, eye.outer_corner, ProbeAxis::kEyeHorizontal,
        half_w, half_w - profile.pupil_travel_x);
    add(Direction::kInward, eye.inner_corner, ProbeAxis::kEyeHorizontal,
        half_w, half_w - profile.pupil_travel_x);
    add(Direction::kUpward, eye.contour[4], ProbeAxis::kEyeVertical, half_h,
        half_h + profile.pupil_travel_y);
    add(Direction::kDownward, eye.contour[12], ProbeAxis::kEyeVertical, half_h,
        half_h + profile.pupil_travel_y);
  }
  return ProbeTable<double>(probes);
}

CoupledBlendShapes<double> oracle_blendshapes(const SubjectProfile& profile,
                                              const GazeSample& truth,
                                              const ProbeTable<double>& probes) {
  check_gaze(truth);
  auto lerp_clip = [](double d, double neutral, double activated) {
    return std::clamp((d - neutral) / (activated - neutral), 0.0, 1.0);
  };
  const double half_w = 0.5 * profile.eye_width;
  const double half_h = 0.5 * profile.eye_height;
  // Pupil offset from the eye center, image coordinates.
  const double ox = truth.gx * profile.pupil_travel_x + profile.neutral_bias.x();
  const double oy = -truth.gy * profile.pupil_travel_y + profile.neutral_bias.y();

  AggregateBlendShapes<double> agg;
  for (EyeSide side : kEyes) {
    const double o = outward_sign(side);
    auto value = [&](Direction d, double distance) {
      const auto& p = probes(side, d);
      const double unit =
          p.normalizer == Normalizer::kEyeWidth ? profile.eye_width : 1.0;
      return lerp_clip(distance / unit, p.d_neutral, p.d_activated);
    };
    const double outward = value(Direction::kOutward, std::abs(o * half_w - ox));
    const double inward = value(Direction::kInward, std::abs(o * half_w + ox));
    const double upward = value(Direction::kUpward, std::abs(half_h - oy));
    const double downward = value(Direction::kDownward, std::abs(half_h + oy));
    EyeAggregate<double>& eye = side == EyeSide::kLeft ? agg.left : agg.right;
    eye.horizontal = o * (outward - inward);
    eye.vertical = upward - downward;
  }
  const double m = 0.5 * (std::abs(agg.left.horizontal) + std::abs(agg.right.horizontal));
  return {0.5 * (agg.left.vertical + agg.right.vertical),
          agg.left.horizontal < 0 ? -m : m, agg.right.horizontal < 0 ? -m : m};
}

CoupledBlendShapes<double> oracle_blendshapes(const SubjectProfile& profile,
                                              const GazeSample& truth) {
  return oracle_blendshapes(
      profile, truth,
      default_probe_table(EyeIndexMap::mediapipe_default(), SubjectProfile{}));
}

SplitFrame split_frame(const RefinedFaceMesh<double>& refined,
                       const EyeIndexMap& index_map, long frame_w_px,
                       long frame_h_px, double roi_scale) {
  index_map.validate();
  FaceMesh<double>::Vertices coarse = refined.vertices().leftCols(kFaceMeshSize);
  for (EyeSide side : kEyes) {
    const EyeIndices& eye = index_map[side];
    const Eigen::Vector2d c = refined.xy(eye.eye_center);
    for (Eigen::Index i : eye.contour) {
      coarse.col(i).head<2>() = c + 0.95 * (refined.xy(i) - c);
    }
  }
  SplitFrame out{FaceMesh<double>(std::move(coarse)), {}, {}};
  for (EyeSide side : kEyes) {
    EyeRefinement<double>& eye = side == EyeSide::kLeft ? out.left : out.right;
    eye.side = side;
    eye.crop = eye_roi(out.mesh, side, index_map, frame_w_px, frame_h_px, roi_scale);
    const EyeIndices& indices = index_map[side];
    for (Eigen::Index k = 0; k < kContourSize; ++k) {
      eye.contour.col(k) = frame_to_crop<double>(
          eye.crop, refined.xy(indices.contour[static_cast<std::size_t>(k)]));
    }
    for (Eigen::Index k = 0; k < kIrisSize; ++k) {
      eye.iris.col(k) = frame_to_crop<double>(
          eye.crop, refined.xy(iris_index(side, static_cast<IrisPoint>(k))));
    }
  }
  return out;
}

namespace {

double parse_number(std::string_view text, const std::string& spec) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ArgumentError("bad number in signal spec '" + spec + "'");
  }
  return value;
}

}  // namespace

std::vector<GazeSample> make_signal(const std::string& spec, std::size_t frames,
                                    std::uint64_t seed) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg =
      colon == std::string::npos ? std::string() : spec.substr(colon + 1);
  std::vector<GazeSample> out;

  if (kind == "neutral" || kind == "const") {
    GazeSample g;
    if (kind == "const") {
      const auto comma = arg.find(',');
      if (comma == std::string::npos) {
        throw ArgumentError("const signal needs GX,GY");
      }
      g = {parse_number(std::string_view(arg).substr(0, comma), spec),
           parse_number(std::string_view(arg).substr(comma + 1), spec)};
    }
    check_gaze(g);
    out.assign(frames, g);
  } else if (kind == "grid") {
    const double n = parse_number(arg, spec);
    if (!(n >= 2) || n != std::floor(n)) {
      throw ArgumentError("grid signal needs an integer N >= 2");
    }
    const auto side = static_cast<std::size_t>(n);
    const std::size_t count = frames == 0 ? side * side : frames;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t cell = i % (side * side);
      const double step = 2.0 / static_cast<double>(side - 1);
      out.push_back({std::min(1.0, -1.0 + step * static_cast<double>(cell % side)),
                     std::min(1.0, -1.0 + step * static_cast<double>(cell / side))});
    }
  } else if (kind == "sinusoid") {
    const double period = parse_number(arg, spec);
    if (!(period > 0)) throw ArgumentError("sinusoid period must be > 0");
    out.reserve(frames);
    for (std::size_t i = 0; i < frames; ++i) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(i);
      out.push_back({std::sin(t / period),
                     std::sin(t / (period * std::numbers::phi))});
    }
  } else if (kind == "saccade") {
    const double hold = parse_number(arg, spec);
    if (!(hold >= 1) || hold != std::floor(hold)) {
      throw ArgumentError("saccade hold must be an integer >= 1");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    GazeSample g;
    out.reserve(frames);
    for (std::size_t i = 0; i < frames; ++i) {
      if (i % static_cast<std::size_t>(hold) == 0) g = {uniform(rng), uniform(rng)};
      out.push_back(g);
    }
  } else {
    throw ArgumentError("unknown signal kind '" + kind + "'");
  }
  return out;
}

}  // namespace pupilrig
