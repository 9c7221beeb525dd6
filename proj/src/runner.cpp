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

#include "pupilrig/runner.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "pupilrig/config_io.h"
#include "pupilrig/errors.h"
#include "pupilrig/metrics.h"

namespace pupilrig {
namespace {

using Clock = std::chrono::steady_clock;

RefinedFaceMesh<double> checked_refined(const TraceRecord& record,
                                        const EyeIndexMap& index_map,
                                        std::size_t line) {
  try {
    return record.refined(index_map);
  } catch (const std::exception& e) {
    throw ParseError(line, e.what());
  }
}

}  // namespace

RunSummary run_trace(std::istream& in, std::ostream& out,
                     const PipelineConfig& config, const RunOptions& options) {
  Pipeline pipeline(config);
  TraceReader reader(in);
  RunSummary summary;

  if (options.output == OutputFormat::kCsv) out << frame_csv_header() << '\n';
  const auto start = Clock::now();
  std::string line;
  while (auto record = reader.next()) {
    if (options.expect_format && record->format() != *options.expect_format) {
      throw ParseError(reader.line(), std::string("expected a ") +
                                          to_string(*options.expect_format) +
                                          " record");
    }
    BlendShapeFrame frame;
    try {
      if (const auto* split = std::get_if<SplitFrame>(&record->data)) {
        frame = pipeline.process(split->mesh, split->left, split->right);
      } else {
        frame = pipeline.process(std::get<RefinedFaceMesh<double>>(record->data));
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(reader.line(), e.what());
    }
    line = options.output == OutputFormat::kCsv ? format_frame_csv(frame)
                                                : format_frame_record(frame);
    out << line << '\n';

    const auto& s = frame.smoothed;
    if (summary.frames == 0) {
      summary.min = summary.max = s;
    } else {
      summary.min = {std::min(summary.min.vertical, s.vertical),
                     std::min(summary.min.horizontal_left, s.horizontal_left),
                     std::min(summary.min.horizontal_right, s.horizontal_right)};
      summary.max = {std::max(summary.max.vertical, s.vertical),
                     std::max(summary.max.horizontal_left, s.horizontal_left),
                     std::max(summary.max.horizontal_right, s.horizontal_right)};
    }
    ++summary.frames;
  }
  summary.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  summary.frames_per_second =
      summary.seconds > 0 ? static_cast<double>(summary.frames) / summary.seconds : 0.0;
  if (!out) throw ArgumentError("write error on output stream");
  return summary;
}

RunSummary run_trace(const std::filesystem::path& input,
                     const std::filesystem::path& config,
                     const std::filesystem::path& output,
                     const RunOptions& options) {
  const PipelineConfig cfg = config.empty() ? PipelineConfig{} : load_config(config);
  std::ifstream in(input);
  if (!in) throw ParseError(0, "cannot open input trace " + input.string());
  std::ofstream out(output, std::ios::binary);
  if (!out) throw ArgumentError("cannot open output " + output.string());
  try {
    return run_trace(in, out, cfg, options);
  } catch (const ParseError& e) {
    throw e.in_file(input.string());
  }
}

std::size_t calibration_report(std::istream& in, std::ostream& out,
                               const PipelineConfig& config) {
  Pipeline pipeline(config);
  TraceReader reader(in);
  out << calibration_csv_header() << '\n';
  std::size_t frames = 0;
  while (auto record = reader.next()) {
    const auto mesh = checked_refined(*record, config.index_map, reader.line());
    BlendShapeFrame frame;
    try {
      frame = pipeline.process(mesh);
    } catch (const std::exception& e) {
      throw ParseError(reader.line(), e.what());
    }
    out << format_calibration_csv(frame);
    ++frames;
  }
  return frames;
}

std::size_t write_synth_trace(std::ostream& out, const PipelineConfig& config,
                              std::span<const GazeSample> signal,
                              std::uint64_t seed, TraceFormat format) {
  TraceGenerator gen(config.synth.profile, seed, config.index_map);
  for (const GazeSample& g : signal) {
    const SynthFrame frame = gen.next(g);
    if (format == TraceFormat::kRefined) {
      out << format_trace_record(frame.frame_index, frame.mesh, frame.truth);
    } else {
      const SplitFrame split =
          split_frame(frame.mesh, config.index_map, config.synth.frame_w_px,
                      config.synth.frame_h_px, config.synth.roi_scale);
      out << format_trace_record(frame.frame_index, split, frame.truth);
    }
    out << '\n';
  }
  return signal.size();
}

EvalSummary evaluate_traces(std::istream& pred, std::istream& gt,
                            std::ostream& csv, const EyeIndexMap& index_map,
                            bool all_vertices) {
  TraceReader pred_reader(pred);
  TraceReader gt_reader(gt);
  EvalSummary summary;
  csv << "frame,ied,mad_ied,mse_ied\n";
  while (true) {
    auto p = pred_reader.next();
    auto g = gt_reader.next();
    if (!p && !g) break;
    if (!p || !g) {
      throw ParseError(p ? pred_reader.line() : gt_reader.line(),
                       "prediction and ground truth differ in frame count");
    }
    const auto pm = checked_refined(*p, index_map, pred_reader.line());
    const auto gm = checked_refined(*g, index_map, gt_reader.line());
    double ied = 0.0;
    try {
      ied = inter_eye_distance(gm, index_map);
    } catch (const GeometryError& e) {
      throw ParseError(gt_reader.line(), e.what());
    }
    LandmarkSet<double> ps, gs;
    if (all_vertices) {
      ps = pm.vertices().topRows(2);
      gs = gm.vertices().topRows(2);
    } else {
      ps = eye_landmarks(pm, index_map);
      gs = eye_landmarks(gm, index_map);
    }
    const double mad = mad_ied(ps, gs, ied);
    const double mse = mse_ied(ps, gs, ied);
    csv << g->frame_index << ',' << format_number(ied) << ',' << format_number(mad)
        << ',' << format_number(mse) << '\n';
    summary.mean_mad_ied += mad;
    summary.mean_mse_ied += mse;
    ++summary.frames;
  }
  if (summary.frames > 0) {
    summary.mean_mad_ied /= static_cast<double>(summary.frames);
    summary.mean_mse_ied /= static_cast<double>(summary.frames);
  }
  return summary;
}

BenchResult bench(const PipelineConfig& config, std::size_t n_frames,
                  std::uint64_t seed) {
  if (n_frames == 0) throw ArgumentError("bench needs at least one frame");
  constexpr std::size_t kPoolSize = 2048;
  const std::size_t pool_size = std::min(n_frames, kPoolSize);
  const auto signal = make_signal("sinusoid:240", pool_size, seed);
  const auto pool = generate_trace(config.synth.profile, signal, seed, config.index_map);

  // Warm the caches and the allocator on a throwaway instance.
  {
    Pipeline warmup(config);
    for (std::size_t i = 0; i < std::min<std::size_t>(pool_size, 256); ++i) {
      warmup.process(pool[i].mesh);
    }
  }

  Pipeline pipeline(config);
  std::vector<double> latencies(n_frames);
  double checksum = 0.0;
  const auto start = Clock::now();
  for (std::size_t i = 0; i < n_frames; ++i) {
    const auto t0 = Clock::now();
    const BlendShapeFrame frame = pipeline.process(pool[i % pool_size].mesh);
    const auto t1 = Clock::now();
    checksum += frame.smoothed.vertical;
    latencies[i] = std::chrono::duration<double, std::micro>(t1 - t0).count();
  }
  const double total = std::chrono::duration<double>(Clock::now() - start).count();
  if (!std::isfinite(checksum)) throw ArgumentError("non-finite bench output");

  BenchResult result;
  result.frames = n_frames;
  double sum = 0.0;
  for (double l : latencies) sum += l;
  result.mean_latency_us = sum / static_cast<double>(n_frames);
  std::vector<double> sorted = latencies;
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(0.99 * static_cast<double>(n_frames))) - 1;
  result.p99_latency_us = sorted[std::min(rank, n_frames - 1)];
  result.frames_per_second = total > 0 ? static_cast<double>(n_frames) / total : 0.0;
  return result;
}

}  // namespace pupilrig
