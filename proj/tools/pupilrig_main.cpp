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

// pupilrig: command line front end.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "pupilrig/config_io.h"
#include "pupilrig/errors.h"
#include "pupilrig/runner.h"
#include "pupilrig/synth.h"
#include "pupilrig/trace_io.h"

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

struct Options {
  std::string config;
  std::string input;
  std::string output;
  std::string gt;
  std::string format;
  std::string signal = "sinusoid:240";
  std::uint64_t seed = 42;
  std::size_t frames = 1000;
  bool csv = false;
  bool all_vertices = false;
};

pupilrig::PipelineConfig config_of(const Options& o) {
  return o.config.empty() ? pupilrig::PipelineConfig{}
                          : pupilrig::load_config(o.config);
}

// Output file, or stdout for "" and "-".
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw pupilrig::ArgumentError("cannot open output " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw pupilrig::ParseError(0, "cannot open input " + path);
  return in;
}

int cmd_run(const Options& o) {
  const auto config = config_of(o);
  pupilrig::RunOptions options;
  if (!o.format.empty()) options.expect_format = pupilrig::parse_trace_format(o.format);
  options.output = o.csv ? pupilrig::OutputFormat::kCsv : pupilrig::OutputFormat::kJsonl;
  auto in = open_input(o.input);
  Sink sink(o.output);
  pupilrig::RunSummary s;
  try {
    s = pupilrig::run_trace(in, sink.stream(), config, options);
  } catch (const pupilrig::ParseError& e) {
    throw e.in_file(o.input);
  }
  std::cerr << "frames: " << s.frames << "\n"
            << "throughput: " << s.frames_per_second << " frames/s\n";
  if (s.frames > 0) {
    std::cerr << "vertical: [" << s.min.vertical << ", " << s.max.vertical << "]\n"
              << "horizontal_left: [" << s.min.horizontal_left << ", "
              << s.max.horizontal_left << "]\n"
              << "horizontal_right: [" << s.min.horizontal_right << ", "
              << s.max.horizontal_right << "]\n";
  }
  return 0;
}

int cmd_synth(const Options& o) {
  const auto config = config_of(o);
  const auto format = o.format.empty() ? pupilrig::TraceFormat::kRefined
                                       : pupilrig::parse_trace_format(o.format);
  const auto signal = pupilrig::make_signal(o.signal, o.frames, o.seed);
  Sink sink(o.output);
  const auto n = pupilrig::write_synth_trace(sink.stream(), config, signal, o.seed, format);
  std::cerr << "frames: " << n << "\n";
  return 0;
}

int cmd_eval(const Options& o) {
  const auto config = config_of(o);
  auto pred = open_input(o.input);
  auto gt = open_input(o.gt);
  Sink sink(o.output);
  const auto s = pupilrig::evaluate_traces(pred, gt, sink.stream(), config.index_map,
                                           o.all_vertices);
  std::cerr << "frames: " << s.frames << "\n"
            << "mean MAD IED: " << 100.0 * s.mean_mad_ied << " %\n"
            << "mean MSE IED: " << s.mean_mse_ied << "\n";
  return 0;
}

int cmd_calib_report(const Options& o) {
  const auto config = config_of(o);
  auto in = open_input(o.input);
  Sink sink(o.output);
  const auto n = pupilrig::calibration_report(in, sink.stream(), config);
  std::cerr << "frames: " << n << "\n";
  return 0;
}

int cmd_bench(const Options& o) {
  const auto config = config_of(o);
  const auto r = pupilrig::bench(config, o.frames, o.seed);
  std::cout << "frames: " << r.frames << "\n"
            << "mean latency: " << r.mean_latency_us << " us\n"
            << "p99 latency: " << r.p99_latency_us << " us\n"
            << "throughput: " << r.frames_per_second << " frames/s\n";
  return 0;
}

int cmd_config_dump(const Options& o) {
  const auto config = config_of(o);
  Sink sink(o.output);
  sink.stream() << pupilrig::dump_config(config);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pupil blend shape estimation from face landmark traces"};
  app.require_subcommand(1);
  Options o;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
  };
  auto add_output = [&](CLI::App* cmd) {
    cmd->add_option("--output", o.output, "Output file (default stdout)");
  };
  auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", o.format, "Trace schema")
        ->check(CLI::IsMember({"refined", "split"}));
  };

  auto* run = app.add_subcommand("run", "Trace -> blend shape coefficients");
  add_config(run);
  run->add_option("--input", o.input, "Input trace (JSONL)")->required();
  add_output(run);
  add_format(run);
  run->add_flag("--csv", o.csv, "Write the CSV projection instead of JSONL");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic trace");
  add_config(synth);
  add_output(synth);
  add_format(synth);
  synth->add_option("--seed", o.seed, "Noise seed");
  synth->add_option("--frames", o.frames, "Number of frames");
  synth->add_option("--signal", o.signal,
                    "Gaze signal: neutral | const:GX,GY | grid:N | sinusoid:PERIOD | "
                    "saccade:HOLD");

  auto* eval = app.add_subcommand("eval", "Landmark error (MAD/MSE IED) as CSV");
  add_config(eval);
  eval->add_option("--input", o.input, "Predicted trace")->required();
  eval->add_option("--gt", o.gt, "Ground-truth trace")->required();
  add_output(eval);
  eval->add_flag("--all-vertices", o.all_vertices, "Score all 478 vertices");

  auto* report = app.add_subcommand("calib-report", "Per-frame calibrator internals as CSV");
  add_config(report);
  report->add_option("--input", o.input, "Input trace (JSONL)")->required();
  add_output(report);

  auto* bench = app.add_subcommand("bench", "Measure post-network pipeline throughput");
  add_config(bench);
  bench->add_option("--frames", o.frames, "Number of frames")->check(CLI::PositiveNumber);
  bench->add_option("--seed", o.seed, "Noise seed");

  auto* config = app.add_subcommand("config", "Configuration utilities");
  config->require_subcommand(1);
  auto* dump = config->add_subcommand("dump", "Print the effective configuration");
  add_config(dump);
  add_output(dump);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*run) return cmd_run(o);
    if (*synth) return cmd_synth(o);
    if (*eval) return cmd_eval(o);
    if (*report) return cmd_calib_report(o);
    if (*bench) return cmd_bench(o);
    if (*dump) return cmd_config_dump(o);
  } catch (const pupilrig::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const pupilrig::ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const pupilrig::GeometryError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const pupilrig::IndexError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const pupilrig::ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return kUsageError;
}
