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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "pupilrig/synth.h"

using namespace pupilrig;

namespace {

SubjectProfile quiet_profile() {
  SubjectProfile p;
  p.noise_sigma = 0.0;
  return p;
}

Eigen::Vector2d iris_center(const SynthFrame& f, EyeSide side) {
  return f.mesh.xy(iris_index(side, IrisPoint::kCenter));
}

}  // namespace

TEST_CASE("neutral gaze puts the pupil on the eye center") {
  TraceGenerator gen(quiet_profile(), 42);
  const auto f = gen.next({0.0, 0.0});
  CHECK(iris_center(f, EyeSide::kLeft) == Eigen::Vector2d(0.35, 0.45));
  CHECK(iris_center(f, EyeSide::kRight) == Eigen::Vector2d(0.65, 0.45));
}

TEST_CASE("full upward gaze lifts the pupil by the vertical travel") {
  TraceGenerator gen(quiet_profile(), 42);
  const auto f = gen.next({0.0, 1.0});
  CHECK(iris_center(f, EyeSide::kLeft).y() == doctest::Approx(0.45 - 0.02).epsilon(1e-15));
  CHECK(iris_center(f, EyeSide::kLeft).x() == 0.35);
  const auto g = gen.next({1.0, 0.0});
  CHECK(iris_center(g, EyeSide::kRight).x() ==
        doctest::Approx(0.65 + 0.035).epsilon(1e-15));
}

TEST_CASE("eye geometry follows the profile") {
  const auto profile = quiet_profile();
  TraceGenerator gen(profile, 1);
  const auto f = gen.next({0.3, 0.2});
  const auto map = EyeIndexMap::mediapipe_default();
  for (EyeSide side : kEyes) {
    const auto& eye = map[side];
    const Eigen::Vector2d c = profile.eye_center(side);
    const double width =
        (f.mesh.xy(eye.inner_corner) - f.mesh.xy(eye.outer_corner)).norm();
    CHECK(width == doctest::Approx(profile.eye_width).epsilon(1e-12));
    for (Eigen::Index i : eye.contour) {
      const Eigen::Vector2d p = f.mesh.xy(i) - c;
      const double a = profile.eye_width / 2, b = profile.eye_height / 2;
      CHECK((p.x() * p.x()) / (a * a) + (p.y() * p.y()) / (b * b) ==
            doctest::Approx(1.0).epsilon(1e-12));
    }
    const Eigen::Vector2d pupil = iris_center(f, side);
    for (IrisPoint k : {IrisPoint::kRight, IrisPoint::kUp, IrisPoint::kLeft,
                        IrisPoint::kDown}) {
      CHECK((f.mesh.xy(iris_index(side, k)) - pupil).norm() ==
            doctest::Approx(profile.iris_radius()).epsilon(1e-12));
    }
  }
  CHECK((f.mesh.vertices().row(2).array() == profile.z_plane).all());
}

TEST_CASE("non-eye vertices do not depend on gaze") {
  SubjectProfile profile;
  TraceGenerator gen(profile, 3);
  const auto a = gen.next({-1.0, 1.0}).mesh;
  const auto b = gen.next({1.0, -1.0}).mesh;
  const auto map = EyeIndexMap::mediapipe_default();
  std::vector<bool> eye(kRefinedMeshSize, false);
  for (EyeSide side : kEyes) {
    for (Eigen::Index i : map[side].contour) eye[i] = true;
  }
  for (Eigen::Index i = kFaceMeshSize; i < kRefinedMeshSize; ++i) eye[i] = true;
  for (Eigen::Index i = 0; i < kRefinedMeshSize; ++i) {
    if (!eye[i]) CHECK(a.vertex(i) == b.vertex(i));
  }
}

TEST_CASE("same seed gives bit-identical traces") {
  const auto signal = make_signal("sinusoid:120", 300, 42);
  SubjectProfile profile;
  profile.drift_amplitude = 0.003;
  const auto a = generate_trace(profile, signal, 42);
  const auto b = generate_trace(profile, signal, 42);
  const auto c = generate_trace(profile, signal, 43);
  REQUIRE(a.size() == 300);
  bool any_difference = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].mesh.vertices() == b[i].mesh.vertices());
    CHECK(a[i].frame_index == i);
    CHECK(a[i].truth == signal[i]);
    any_difference |= a[i].mesh.vertices() != c[i].mesh.vertices();
  }
  CHECK(any_difference);
}

TEST_CASE("noise is truncated at four sigma") {
  SubjectProfile profile;
  profile.noise_sigma = 0.01;
  TraceGenerator gen(profile, 7);
  double worst = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const auto f = gen.next({});
    const Eigen::Vector2d off = iris_center(f, EyeSide::kLeft) - profile.left_eye_center;
    worst = std::max({worst, std::abs(off.x()), std::abs(off.y())});
  }
  CHECK(worst <= 4.0 * profile.noise_sigma + 1e-15);
  CHECK(worst > 3.0 * profile.noise_sigma);
}

TEST_CASE("drift moves the pupil sinusoidally along y") {
  auto profile = quiet_profile();
  profile.drift_amplitude = 0.004;
  profile.drift_period = 100.0;
  TraceGenerator gen(profile, 1);
  for (int t = 0; t < 200; ++t) {
    const auto f = gen.next({});
    const double want =
        0.45 + 0.004 * std::sin(2.0 * std::numbers::pi * t / 100.0);
    CHECK(iris_center(f, EyeSide::kRight).y() == doctest::Approx(want).epsilon(1e-12));
    CHECK(iris_center(f, EyeSide::kRight).x() == 0.65);
  }
}

TEST_CASE("empty signal and invalid profiles are rejected") {
  CHECK_THROWS_AS(generate_trace(SubjectProfile{}, {}, 1), ArgumentError);
  SubjectProfile p;
  p.eye_width = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = SubjectProfile{};
  p.noise_sigma = -1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("oracle examples") {
  SubjectProfile profile = quiet_profile();
  const auto zero = oracle_blendshapes(profile, {0.0, 0.0});
  CHECK(zero.vertical == 0.0);
  CHECK(zero.horizontal_left == 0.0);
  CHECK(zero.horizontal_right == 0.0);
  CHECK(oracle_blendshapes(profile, {0.0, 1.0}).vertical == doctest::Approx(1.0));
  const auto mixed = oracle_blendshapes(profile, {0.4, -0.3});
  CHECK(mixed.vertical == doctest::Approx(-0.3).epsilon(1e-12));
  CHECK(mixed.horizontal_left == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(mixed.horizontal_right == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("oracle agrees with the probe measurements on a gaze grid") {
  const auto profile = quiet_profile();
  const auto map = EyeIndexMap::mediapipe_default();
  const auto probes = default_probe_table(map, profile);
  TraceGenerator gen(profile, 1);
  for (const auto& gaze : make_signal("grid:21", 0, 0)) {
    const auto f = gen.next(gaze);
    const auto got = couple_eyes(merge_opposites(raw_activations(f.mesh, probes, map)));
    const auto want = oracle_blendshapes(profile, gaze);
    CHECK(std::abs(got.vertical - want.vertical) < 1e-9);
    CHECK(std::abs(got.horizontal_left - want.horizontal_left) < 1e-9);
    CHECK(std::abs(got.horizontal_right - want.horizontal_right) < 1e-9);
    CHECK(want.vertical == doctest::Approx(gaze.gy).epsilon(1e-12));
    CHECK(want.horizontal_left == doctest::Approx(gaze.gx).epsilon(1e-12));
  }
}

TEST_CASE("default probe references match the eyeball model") {
  const auto probes = default_probe_table();
  const auto& up = probes(EyeSide::kLeft, Direction::kUpward);
  CHECK(up.d_neutral == doctest::Approx(0.025 / 0.12).epsilon(1e-12));
  CHECK(up.d_activated == doctest::Approx(0.045 / 0.12).epsilon(1e-12));
  const auto& out = probes(EyeSide::kRight, Direction::kOutward);
  CHECK(out.d_neutral == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(out.d_activated == doctest::Approx(0.025 / 0.12).epsilon(1e-12));
}

TEST_CASE("signal specs") {
  const auto grid = make_signal("grid:3", 0, 0);
  REQUIRE(grid.size() == 9);
  CHECK(grid.front() == GazeSample{-1.0, -1.0});
  CHECK(grid.back() == GazeSample{1.0, 1.0});
  const auto c = make_signal("const:0.25,-0.5", 10, 0);
  REQUIRE(c.size() == 10);
  CHECK(c[9] == GazeSample{0.25, -0.5});
  CHECK(make_signal("neutral", 4, 0).back() == GazeSample{});
  for (const auto& spec : {"sinusoid:50", "saccade:10"}) {
    const auto s = make_signal(spec, 500, 3);
    REQUIRE(s.size() == 500);
    for (const auto& g : s) {
      CHECK(std::abs(g.gx) <= 1.0);
      CHECK(std::abs(g.gy) <= 1.0);
    }
  }
  CHECK_THROWS_AS(make_signal("bogus", 10, 0), ArgumentError);
  CHECK_THROWS_AS(make_signal("grid:0", 10, 0), ArgumentError);
}

TEST_CASE("scaled profile scales geometry about the pivot") {
  const auto base = quiet_profile();
  const auto s = scaled_profile(base, 2.0);
  CHECK(s.eye_width == doctest::Approx(0.24));
  CHECK(s.left_eye_center.isApprox(Eigen::Vector2d(0.2, 0.4)));
  CHECK(s.pupil_travel_y == doctest::Approx(0.04));
}

TEST_CASE("split frames merge back onto the refined eye landmarks") {
  SubjectProfile profile;
  TraceGenerator gen(profile, 9);
  const auto map = EyeIndexMap::mediapipe_default();
  for (int i = 0; i < 50; ++i) {
    const auto f = gen.next({0.5, -0.5});
    const auto split = split_frame(f.mesh, map, 640, 480);
    const auto merged = merge_refinement(split.mesh, split.left, split.right, map);
    CHECK((merged.vertices().topRows<2>() - f.mesh.vertices().topRows<2>())
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }
}
