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

// Whole-trace drivers behind the command line tool: replay, calibration
// report, synthetic generation, landmark evaluation and benchmarking.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>

#include "pupilrig/pipeline.h"
#include "pupilrig/synth.h"
#include "pupilrig/trace_io.h"

namespace pupilrig {

enum class OutputFormat { kJsonl, kCsv };

struct RunOptions {
  // When set, records in any other format are data errors.
  std::optional<TraceFormat> expect_format;
  OutputFormat output = OutputFormat::kJsonl;
};

struct RunSummary {
  std::size_t frames = 0;
  double seconds = 0.0;
  double frames_per_second = 0.0;
  // Range of the smoothed coefficients; zero when no frames were processed.
  CoupledBlendShapes<double> min;
  CoupledBlendShapes<double> max;
};

RunSummary run_trace(std::istream& in, std::ostream& out,
                     const PipelineConfig& config, const RunOptions& options = {});

// File variant. An empty config path means the built-in defaults. I/O
// failures are reported as ParseError/ConfigError naming the path.
RunSummary run_trace(const std::filesystem::path& input,
                     const std::filesystem::path& config,
                     const std::filesystem::path& output,
                     const RunOptions& options = {});

// Writes calibration_csv_header() and one row per (frame, calibrator).
// Returns the number of frames.
std::size_t calibration_report(std::istream& in, std::ostream& out,
                               const PipelineConfig& config);

// Streams a synthetic trace built from config.synth. Returns frames written.
std::size_t write_synth_trace(std::ostream& out, const PipelineConfig& config,
                              std::span<const GazeSample> signal,
                              std::uint64_t seed, TraceFormat format);

struct EvalSummary {
  std::size_t frames = 0;
  double mean_mad_ied = 0.0;
  double mean_mse_ied = 0.0;
};

// Compares predicted against ground-truth traces frame by frame on the 42
// eye landmarks (or all 478 vertices). IED comes from the ground truth.
// Writes CSV rows frame,ied,mad_ied,mse_ied.
EvalSummary evaluate_traces(std::istream& pred, std::istream& gt,
                            std::ostream& csv, const EyeIndexMap& index_map,
                            bool all_vertices = false);

struct BenchResult {
  std::size_t frames = 0;
  double mean_latency_us = 0.0;
  double p99_latency_us = 0.0;
  double frames_per_second = 0.0;
};

// Steady-state process() throughput on in-memory synthetic frames.
BenchResult bench(const PipelineConfig& config, std::size_t n_frames,
                  std::uint64_t seed = 1);

}  // namespace pupilrig
