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

// Line-delimited JSON traces and per-frame outputs.
//
// Input records, one frame per line:
//   {"frame": N, "format": "refined", "vertices": [[x, y, z] x 478],
//    "truth": {"gx": .., "gy": ..}}
//   {"frame": N, "format": "split", "vertices": [[x, y, z] x 468],
//    "eyes": {"left": EYE, "right": EYE}}
// with EYE = {"contour": [[x, y] x 16], "iris": [[x, y] x 5],
//             "crop": {"center_x", "center_y", "side_px", "frame_w_px",
//                      "frame_h_px"}}.
// "truth" is optional. Blank lines are skipped.

#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "pupilrig/mesh.h"
#include "pupilrig/pipeline.h"
#include "pupilrig/synth.h"

namespace pupilrig {

enum class TraceFormat { kRefined, kSplit };

const char* to_string(TraceFormat format);
TraceFormat parse_trace_format(std::string_view name);

struct TraceRecord {
  std::size_t frame_index = 0;
  std::variant<RefinedFaceMesh<double>, SplitFrame> data;
  std::optional<GazeSample> truth;

  TraceFormat format() const {
    return data.index() == 0 ? TraceFormat::kRefined : TraceFormat::kSplit;
  }
  // Refined mesh, merging the refinement first for split records.
  RefinedFaceMesh<double> refined(const EyeIndexMap& index_map) const;
};

// Throws ParseError carrying `line_no`.
TraceRecord parse_trace_record(std::string_view line, std::size_t line_no);

std::string format_trace_record(std::size_t frame_index,
                                const RefinedFaceMesh<double>& mesh,
                                const std::optional<GazeSample>& truth = {});
std::string format_trace_record(std::size_t frame_index, const SplitFrame& split,
                                const std::optional<GazeSample>& truth = {});

/// Streams records from a JSONL source, tracking line numbers.
class TraceReader {
 public:
  explicit TraceReader(std::istream& in) : in_(in) {}

  std::optional<TraceRecord> next();
  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::string buffer_;
  std::size_t line_ = 0;
};

// One JSON object per frame with every BlendShapeFrame field.
std::string format_frame_record(const BlendShapeFrame& frame);

// CSV projection of the coefficients.
std::string frame_csv_header();
std::string format_frame_csv(const BlendShapeFrame& frame);

// Per-calibrator internals, one row per (frame, calibrator).
std::string calibration_csv_header();
std::string format_calibration_csv(const BlendShapeFrame& frame);

// Shortest text that parses back to the same double.
std::string format_number(double value);

}  // namespace pupilrig
