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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pupilrig/metrics.h"
#include "pupilrig/pipeline.h"
#include "pupilrig/trace_io.h"
#include "reference_filter.h"
#include "test_util.h"

#ifndef PUPILRIG_CLI
#error "PUPILRIG_CLI must name the command line tool"
#endif

using namespace pupilrig;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records a failed check; the first failure message is kept.
  void expect(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

struct Criterion {
  int id;
  std::string title;
  std::optional<double> time_limit_s;
  std::function<Outcome()> run;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

Outcome activation_endpoints() {
  Outcome o;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  int pairs = 0;
  double worst_swap = 0.0;
  while (pairs < 1000) {
    const double n = u(rng), a = u(rng);
    if (n == a) continue;
    ++pairs;
    o.expect(activation(n, n, a) == 0.0, "activation(d_neutral) != 0");
    o.expect(activation(a, n, a) == 1.0, "activation(d_activated) != 1");
    for (int k = 0; k < 20; ++k) {
      const double d = -1.0 + 0.2 * k;
      const double act = activation(d, n, a);
      o.expect(act >= 0.0 && act <= 1.0, "activation outside [0, 1]");
      worst_swap = std::max(worst_swap, std::abs(act - (1.0 - activation(d, a, n))));
    }
  }
  o.expect(worst_swap <= 1e-12, "swap symmetry off by " + fmt(worst_swap));
  if (o.pass) o.detail = "1000 pairs, max swap asymmetry " + fmt(worst_swap);
  return o;
}

Outcome merge_contract() {
  Outcome o;
  std::mt19937_64 rng(2);
  const auto map = EyeIndexMap::mediapipe_default();
  std::set<Eigen::Index> contour;
  for (EyeSide s : kEyes) contour.insert(map[s].contour.begin(), map[s].contour.end());
  o.expect(contour.size() == 32, "index map does not name 32 contour vertices");
  double worst_pupil_z = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto mesh = testing::random_face_mesh(rng);
    const auto left = testing::random_refinement(rng, EyeSide::kLeft);
    const auto right = testing::random_refinement(rng, EyeSide::kRight);
    const auto refined = merge_refinement(mesh, left, right, map);
    o.expect(refined.vertices().cols() == kRefinedMeshSize, "output length != 478");
    for (Eigen::Index i = 0; i < kFaceMeshSize; ++i) {
      if (contour.count(i) != 0) {
        o.expect(refined.vertex(i).z() == mesh.vertex(i).z(), "contour z changed");
      } else {
        o.expect(refined.vertex(i) == mesh.vertex(i), "non-eye vertex changed");
      }
    }
    for (EyeSide side : kEyes) {
      const auto& idx = map[side];
      const double corner_mean =
          0.5 * (mesh.vertex(idx.inner_corner).z() + mesh.vertex(idx.outer_corner).z());
      for (int k = 0; k < kIrisSize; ++k) {
        const auto v = iris_index(side, static_cast<IrisPoint>(k));
        worst_pupil_z = std::max(worst_pupil_z, std::abs(refined.vertex(v).z() - corner_mean));
      }
    }
  }
  o.expect(worst_pupil_z <= 1e-12, "pupil z off corner mean by " + fmt(worst_pupil_z));
  if (o.pass) o.detail = "1000 meshes, max pupil z error " + fmt(worst_pupil_z);
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  SubjectProfile profile;
  profile.noise_sigma = 0.0;
  PipelineConfig config = PipelineConfig{}.without_filtering();
  config.synth.profile = profile;
  const auto signal = make_signal("grid:21", 0, 0);
  o.expect(signal.size() == 441, "grid is not 21 x 21");
  const auto trace = generate_trace(profile, signal, 42, config.index_map);

  Pipeline pipeline{config};
  double worst = 0.0;
  for (const auto& frame : trace) {
    // Through the trace format, as the CLI would see it.
    const auto record =
        parse_trace_record(format_trace_record(frame.frame_index, frame.mesh, frame.truth), 1);
    const auto got = pipeline.process(record.refined(config.index_map)).smoothed;
    const auto want = oracle_blendshapes(profile, frame.truth);
    worst = std::max({worst, std::abs(got.vertical - want.vertical),
                      std::abs(got.horizontal_left - want.horizontal_left),
                      std::abs(got.horizontal_right - want.horizontal_right)});
  }
  o.expect(worst <= 1e-6, "max deviation from oracle " + fmt(worst));
  if (o.pass) o.detail = "441 grid points, max deviation " + fmt(worst);
  return o;
}

// Neutral-gaze error is the mean smoothed output over the last 50 of the 300
// neutral frames. Single frames carry sensor noise of about 0.02 (one sigma)
// after coupling and smoothing, which the calibration cannot remove.
Outcome calibration_convergence() {
  Outcome o;
  constexpr int kFrames = 300;
  constexpr int kWindow = 50;
  SubjectProfile profile;
  profile.noise_sigma = 0.001;
  // Lifting the pupil by 0.005 stretches the pupil-to-lower-lid gap from
  // 0.025 to 0.030: +20% on the upward d_neutral.
  profile.neutral_bias = {0.0, -0.005};
  const auto map = EyeIndexMap::mediapipe_default();
  const auto up_probe = default_probe_table()(EyeSide::kLeft, Direction::kUpward);
  SubjectProfile still = profile;
  still.noise_sigma = 0.0;
  const double biased_up =
      measure_displacement(TraceGenerator(still, 0, map).next({}).mesh, up_probe, map);
  const double default_up = up_probe.d_neutral;
  o.expect(std::abs(biased_up / default_up - 1.2) < 1e-9, "bias is not +20%");

  struct Errors {
    double v = 0, hl = 0, hr = 0, last_v = 0, peak_v = 0;
  };
  auto run = [&](bool calibrate) {
    PipelineConfig config;
    config.calibration.calibrate_neutral = calibrate;
    Pipeline pipeline{config};
    TraceGenerator gen(profile, 42, config.index_map);
    Errors e;
    for (int i = 0; i < kFrames; ++i) {
      const auto s = pipeline.process(gen.next({}).mesh).smoothed;
      if (i >= kFrames - kWindow) {
        e.v += s.vertical / kWindow;
        e.hl += s.horizontal_left / kWindow;
        e.hr += s.horizontal_right / kWindow;
        e.peak_v = std::max(e.peak_v, std::abs(s.vertical));
      }
      e.last_v = s.vertical;
    }
    return e;
  };
  const Errors on = run(true);
  const Errors off = run(false);
  const double on_err = std::max({std::abs(on.v), std::abs(on.hl), std::abs(on.hr)});
  const double off_err = std::max({std::abs(off.v), std::abs(off.hl), std::abs(off.hr)});
  o.expect(on_err < 0.05, "calibrated neutral error " + fmt(on_err));
  o.expect(off_err > 0.15, "uncalibrated neutral error only " + fmt(off_err));
  if (o.pass) {
    o.detail = "error " + fmt(on_err) + " calibrated vs " + fmt(off_err) +
               " uncalibrated (frame 300 vertical " + fmt(on.last_v) +
               ", window peak " + fmt(on.peak_v) + ")";
  }
  return o;
}

Outcome outlier_robustness() {
  Outcome o;
  CalibratorConfig<double> config;
  config.d_initial = 0.30;
  const double width = 2.0 * config.thrs_variance * config.effective_sigma_floor();
  StandardScoreFilter<double> clean(config), spiked(config);
  double worst = 0.0;
  int spikes = 0;
  for (int i = 0; i < 500; ++i) {
    const bool spike = i % 50 == 25;
    spikes += spike;
    const double sign = (i / 50) % 2 == 0 ? 1.0 : -1.0;
    const double d = 0.30;
    const auto a = clean.update(d);
    const auto b = spiked.update(spike ? d + sign * 3.0 * width : d);
    if (a.f_influence == 0.0) {
      worst = std::max(worst, std::abs(b.d_calibrated - a.d_calibrated) / a.d_calibrated);
    }
  }
  o.expect(spikes == 10, "wrong spike count");
  o.expect(worst < 0.02, "relative deviation " + fmt(worst));
  if (o.pass) o.detail = "max relative deviation " + fmt(100 * worst) + "%";
  return o;
}

Outcome hand_trace() {
  Outcome o;
  // The independent loop first.
  testing::ReferenceFilter ref(0.30);
  const double ref_first = ref.update(0.50);
  o.expect(std::abs(ref_first - 0.35) <= 1e-15, "reference loop gives " + fmt(ref_first));
  o.expect(std::abs(ref.f - 0.49) <= 1e-15, "reference loop influence " + fmt(ref.f));

  CalibratorConfig<double> config;
  config.d_initial = 0.30;
  StandardScoreFilter<double> filter(config);
  testing::ReferenceFilter again(0.30);
  const double steps[] = {0.50, 0.31, 0.29};
  for (int k = 0; k < 3; ++k) {
    const auto step = filter.update(steps[k]);
    const double want = again.update(steps[k]);
    o.expect(step.d_calibrated == want && step.f_influence == again.f &&
                 step.sigma == again.sigma,
             "step " + std::to_string(k + 1) + " differs from the reference loop");
    if (k == 0) {
      o.expect(!step.accepted, "0.50 was accepted");
      o.expect(std::abs(step.d_trusted - 0.40) <= 1e-15, "d_trusted " + fmt(step.d_trusted));
      o.expect(std::abs(step.d_calibrated - 0.35) <= 1e-15,
               "d_calibrated " + fmt(step.d_calibrated));
      o.expect(std::abs(step.f_influence - 0.49) <= 1e-15,
               "f_influence " + fmt(step.f_influence));
    }
  }
  if (o.pass) o.detail = "0.35 / 0.49 reproduced, 3 steps identical to the reference loop";
  return o;
}

Outcome scale_invariance() {
  Outcome o;
  SubjectProfile profile;
  profile.noise_sigma = 0.001;
  profile.neutral_bias = {0.002, -0.003};
  const PipelineConfig config;
  const auto signal = make_signal("sinusoid:90", 400, 7);
  const auto base = generate_trace(profile, signal, 7, config.index_map);
  const Eigen::Vector2d pivot(0.5, 0.5);
  double worst = 0.0;
  for (double k : {0.5, 2.0, 5.0}) {
    Pipeline reference{config}, scaled{config}, regenerated{config};
    const auto scaled_trace =
        generate_trace(scaled_profile(profile, k, pivot), signal, 7, config.index_map);
    for (std::size_t i = 0; i < base.size(); ++i) {
      auto v = base[i].mesh.vertices();
      v.topRows<2>() = ((v.topRows<2>().colwise() - pivot) * k).colwise() + pivot;
      const auto a = reference.process(base[i].mesh).smoothed;
      const auto b = scaled.process(RefinedFaceMesh<double>(v)).smoothed;
      const auto c = regenerated.process(scaled_trace[i].mesh).smoothed;
      for (const auto& s : {b, c}) {
        worst = std::max({worst, std::abs(a.vertical - s.vertical),
                          std::abs(a.horizontal_left - s.horizontal_left),
                          std::abs(a.horizontal_right - s.horizontal_right)});
      }
    }
  }
  o.expect(worst <= 1e-6, "max coefficient change " + fmt(worst));
  if (o.pass) o.detail = "k in {0.5, 2, 5}, max change " + fmt(worst);
  return o;
}

Outcome metrics_oracle() {
  Outcome o;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> len(1, 478);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = len(rng);
    LandmarkSet<double> p(2, n), g(2, n);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      p.data()[i] = u(rng);
      g.data()[i] = u(rng);
    }
    const double ied = 0.05 + u(rng);
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double dx = p(0, i) - g(0, i), dy = p(1, i) - g(1, i);
      sum += std::sqrt(dx * dx + dy * dy);
      sum_sq += dx * dx + dy * dy;
    }
    worst = std::max({worst, std::abs(mad_ied(p, g, ied) - sum / n / ied),
                      std::abs(mse_ied(p, g, ied) - sum_sq / n / (ied * ied))});
    o.expect(mad_ied(g, g, ied) == 0.0 && mse_ied(g, g, ied) == 0.0,
             "identity pair gives nonzero error");
  }
  o.expect(worst <= 1e-12, "max deviation from brute force " + fmt(worst));
  if (o.pass) o.detail = "100 pairs, max deviation " + fmt(worst);
  return o;
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return status;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism_and_throughput() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() /
                       ("pupilrig_acceptance_" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  const std::string cli = std::string("'") + PUPILRIG_CLI + "'";
  const std::string trace = "'" + (dir / "trace.jsonl").string() + "'";

  o.expect(shell(cli + " synth --frames 10000 --seed 42 --signal saccade:30 --output " + trace + " 2>/dev/null") == 0,
           "synth failed");
  std::vector<std::string> outputs;
  for (int run = 0; run < 3 && o.pass; ++run) {
    const fs::path out = dir / ("out" + std::to_string(run) + ".jsonl");
    o.expect(shell(cli + " run --input " + trace + " --output '" + out.string() + "' 2>/dev/null") == 0,
             "run failed");
    outputs.push_back(read_file(out));
  }
  std::size_t records = 0;
  if (o.pass) {
    records = static_cast<std::size_t>(std::count(outputs[0].begin(), outputs[0].end(), '\n'));
    o.expect(records == 10000, "run wrote " + std::to_string(records) + " records");
    o.expect(outputs[0] == outputs[1] && outputs[1] == outputs[2], "outputs differ across runs");
  }

  double fps = 0.0;
  if (o.pass) {
    const fs::path bench = dir / "bench.txt";
    o.expect(shell(cli + " bench --frames 20000 > '" + bench.string() + "'") == 0, "bench failed");
    std::istringstream lines(read_file(bench));
    std::string line;
    while (std::getline(lines, line)) {
      if (line.rfind("throughput: ", 0) == 0) fps = std::stod(line.substr(12));
    }
    o.expect(fps >= 10000.0, "bench throughput " + fmt(fps) + " frames/s");
  }
  fs::remove_all(dir);
  if (o.pass) {
    o.detail = "3 identical runs of 10000 records, bench " + fmt(fps) + " frames/s";
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "activation endpoints", 1.0, activation_endpoints},
      {2, "mesh merge contract", 5.0, merge_contract},
      {3, "oracle equivalence", 10.0, oracle_equivalence},
      {4, "calibration convergence", 5.0, calibration_convergence},
      {5, "outlier robustness", 1.0, outlier_robustness},
      {6, "hand-executed filter trace", std::nullopt, hand_trace},
      {7, "scale invariance", std::nullopt, scale_invariance},
      {8, "metrics oracle", std::nullopt, metrics_oracle},
      {9, "determinism and throughput", std::nullopt, determinism_and_throughput},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit_s && seconds >= *c.time_limit_s) {
      o.pass = false;
      o.detail = "took " + fmt(seconds) + " s, limit " + fmt(*c.time_limit_s) + " s";
    }
    failures += !o.pass;
    std::printf("[%s] %d %s (%.3f s): %s\n", o.pass ? "PASS" : "FAIL", c.id,
                c.title.c_str(), seconds, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
