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

#include "pupilrig/trace_io.h"

#include <charconv>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "pupilrig/errors.h"

namespace pupilrig {
namespace {

using Json = nlohmann::json;

class RecordParser {
 public:
  explicit RecordParser(std::size_t line) : line_(line) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(line_, what);
  }

  const Json& at(const Json& j, const char* key) const {
    if (!j.is_object()) fail("expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(std::string("missing '") + key + "'");
    return *it;
  }

  double number(const Json& j, const std::string& what) const {
    if (!j.is_number()) fail(what + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(what + ": non-finite value");
    return v;
  }

  template <int Dim>
  Eigen::Matrix<double, Dim, Eigen::Dynamic> points(const Json& j,
                                                    Eigen::Index count,
                                                    const std::string& what) const {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != count) {
      fail(what + ": expected " + std::to_string(count) + " points");
    }
    Eigen::Matrix<double, Dim, Eigen::Dynamic> out(Dim, count);
    for (Eigen::Index i = 0; i < count; ++i) {
      const Json& p = j[static_cast<std::size_t>(i)];
      if (!p.is_array() || p.size() != Dim) {
        fail(what + "[" + std::to_string(i) + "]: expected " +
             std::to_string(Dim) + " coordinates");
      }
      for (int d = 0; d < Dim; ++d) {
        const Json& v = p[static_cast<std::size_t>(d)];
        if (!v.is_number()) fail(what + "[" + std::to_string(i) + "]: expected numbers");
        out(d, i) = v.get<double>();
      }
    }
    if (!out.allFinite()) fail(what + ": non-finite coordinates");
    return out;
  }

  EyeRefinement<double> eye(const Json& j, EyeSide side) const {
    const std::string name = to_string(side);
    EyeRefinement<double> eye;
    eye.side = side;
    eye.contour = points<2>(at(j, "contour"), kContourSize, name + ".contour");
    eye.iris = points<2>(at(j, "iris"), kIrisSize, name + ".iris");
    const Json& crop = at(j, "crop");
    eye.crop.center_x = number(at(crop, "center_x"), name + ".crop.center_x");
    eye.crop.center_y = number(at(crop, "center_y"), name + ".crop.center_y");
    eye.crop.side_px = number(at(crop, "side_px"), name + ".crop.side_px");
    eye.crop.frame_w_px = number(at(crop, "frame_w_px"), name + ".crop.frame_w_px");
    eye.crop.frame_h_px = number(at(crop, "frame_h_px"), name + ".crop.frame_h_px");
    try {
      eye.crop.validate();
    } catch (const ArgumentError& e) {
      fail(name + ".crop: " + e.what());
    }
    return eye;
  }

 private:
  std::size_t line_;
};

Json points_json(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.cols(); ++i) {
    Json p = Json::array();
    for (Eigen::Index d = 0; d < m.rows(); ++d) p.push_back(m(d, i));
    out.push_back(std::move(p));
  }
  return out;
}

Json header(std::size_t frame_index, TraceFormat format,
            const std::optional<GazeSample>& truth) {
  Json j;
  j["frame"] = frame_index;
  j["format"] = to_string(format);
  if (truth) j["truth"] = {{"gx", truth->gx}, {"gy", truth->gy}};
  return j;
}

}  // namespace

const char* to_string(TraceFormat format) {
  return format == TraceFormat::kRefined ? "refined" : "split";
}

TraceFormat parse_trace_format(std::string_view name) {
  if (name == "refined") return TraceFormat::kRefined;
  if (name == "split") return TraceFormat::kSplit;
  throw ArgumentError("unknown trace format '" + std::string(name) + "'");
}

RefinedFaceMesh<double> TraceRecord::refined(const EyeIndexMap& index_map) const {
  if (const auto* mesh = std::get_if<RefinedFaceMesh<double>>(&data)) return *mesh;
  const auto& split = std::get<SplitFrame>(data);
  return merge_refinement(split.mesh, split.left, split.right, index_map);
}

TraceRecord parse_trace_record(std::string_view line, std::size_t line_no) {
  RecordParser p(line_no);
  Json j;
  try {
    j = Json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    p.fail("malformed JSON record");
  }
  if (!j.is_object()) p.fail("expected a JSON object");

  TraceRecord record;
  const Json& frame = p.at(j, "frame");
  if (!frame.is_number_unsigned()) p.fail("'frame' must be a non-negative integer");
  record.frame_index = frame.get<std::size_t>();

  const Json& vertices = p.at(j, "vertices");
  TraceFormat format;
  if (auto it = j.find("format"); it != j.end()) {
    if (!it->is_string()) p.fail("'format' must be a string");
    try {
      format = parse_trace_format(it->get<std::string>());
    } catch (const ArgumentError& e) {
      p.fail(e.what());
    }
  } else {
    format = j.contains("eyes") ? TraceFormat::kSplit : TraceFormat::kRefined;
  }

  if (format == TraceFormat::kRefined) {
    record.data = RefinedFaceMesh<double>(
        p.points<3>(vertices, kRefinedMeshSize, "vertices"));
  } else {
    const Json& eyes = p.at(j, "eyes");
    record.data = SplitFrame{
        FaceMesh<double>(p.points<3>(vertices, kFaceMeshSize, "vertices")),
        p.eye(p.at(eyes, "left"), EyeSide::kLeft),
        p.eye(p.at(eyes, "right"), EyeSide::kRight)};
  }

  if (auto it = j.find("truth"); it != j.end()) {
    record.truth = GazeSample{p.number(p.at(*it, "gx"), "truth.gx"),
                              p.number(p.at(*it, "gy"), "truth.gy")};
  }
  return record;
}

std::string format_trace_record(std::size_t frame_index,
                                const RefinedFaceMesh<double>& mesh,
                                const std::optional<GazeSample>& truth) {
  Json j = header(frame_index, TraceFormat::kRefined, truth);
  j["vertices"] = points_json(mesh.vertices());
  return j.dump();
}

std::string format_trace_record(std::size_t frame_index, const SplitFrame& split,
                                const std::optional<GazeSample>& truth) {
  Json j = header(frame_index, TraceFormat::kSplit, truth);
  j["vertices"] = points_json(split.mesh.vertices());
  for (const EyeRefinement<double>* eye : {&split.left, &split.right}) {
    const auto& c = eye->crop;
    j["eyes"][to_string(eye->side)] = {
        {"contour", points_json(eye->contour)},
        {"iris", points_json(eye->iris)},
        {"crop",
         {{"center_x", c.center_x},
          {"center_y", c.center_y},
          {"side_px", c.side_px},
          {"frame_w_px", c.frame_w_px},
          {"frame_h_px", c.frame_h_px}}}};
  }
  return j.dump();
}

std::optional<TraceRecord> TraceReader::next() {
  while (std::getline(in_, buffer_)) {
    ++line_;
    if (buffer_.find_first_not_of(" \t\r") == std::string::npos) continue;
    return parse_trace_record(buffer_, line_);
  }
  if (in_.bad()) throw ParseError(line_ + 1, "read error");
  return std::nullopt;
}

std::string format_number(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

std::string format_frame_record(const BlendShapeFrame& frame) {
  using Ordered = nlohmann::ordered_json;
  auto coupled = [](const CoupledBlendShapes<double>& c) {
    return Ordered{{"vertical", c.vertical},
                   {"horizontal_left", c.horizontal_left},
                   {"horizontal_right", c.horizontal_right}};
  };
  Ordered j;
  j["frame"] = frame.frame_index;
  for (EyeSide eye : kEyes) {
    Ordered per_eye;
    for (Direction d : kDirections) per_eye[to_string(d)] = frame.raw(eye, d);
    j["raw"][to_string(eye)] = std::move(per_eye);
  }
  for (EyeSide eye : kEyes) {
    const auto& a = eye == EyeSide::kLeft ? frame.aggregates.left : frame.aggregates.right;
    j["aggregate"][to_string(eye)] = {{"horizontal", a.horizontal},
                                      {"vertical", a.vertical}};
  }
  j["coupled"] = coupled(frame.coupled);
  j["smoothed"] = coupled(frame.smoothed);
  j["calibration"] = Ordered::object();
  for (const auto& c : frame.calibration) {
    j["calibration"][c.id.name()] = c.step.d_calibrated;
  }
  return j.dump();
}

std::string frame_csv_header() {
  std::string h =
      "frame,vertical,horizontal_left,horizontal_right,"
      "coupled_vertical,coupled_horizontal_left,coupled_horizontal_right";
  for (EyeSide eye : kEyes) {
    for (Direction d : kDirections) {
      h += std::string(",raw_") + to_string(eye) + "_" + to_string(d);
    }
  }
  return h;
}

std::string format_frame_csv(const BlendShapeFrame& f) {
  std::string row = std::to_string(f.frame_index);
  for (double v : {f.smoothed.vertical, f.smoothed.horizontal_left,
                   f.smoothed.horizontal_right, f.coupled.vertical,
                   f.coupled.horizontal_left, f.coupled.horizontal_right}) {
    row += "," + format_number(v);
  }
  for (EyeSide eye : kEyes) {
    for (Direction d : kDirections) row += "," + format_number(f.raw(eye, d));
  }
  return row;
}

std::string calibration_csv_header() {
  return "frame,calibrator,fed,accepted,d_current,d_trusted,d_calibrated,sigma,"
         "f_influence";
}

std::string format_calibration_csv(const BlendShapeFrame& f) {
  std::string out;
  for (const auto& c : f.calibration) {
    out += std::to_string(f.frame_index) + "," + c.id.name() + "," +
           (c.fed ? "1" : "0") + "," + (c.step.accepted ? "1" : "0") + "," +
           format_number(c.step.d_current) + "," +
           (c.fed ? format_number(c.step.d_trusted) : std::string()) + "," +
           format_number(c.step.d_calibrated) + "," +
           format_number(c.step.sigma) + "," + format_number(c.step.f_influence) +
           "\n";
  }
  return out;
}

}  // namespace pupilrig
