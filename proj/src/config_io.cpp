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

#include "pupilrig/config_io.h"

#include <fstream>
#include <set>
#include <type_traits>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "pupilrig/errors.h"

namespace pupilrig {
namespace {

using Json = nlohmann::ordered_json;

// Reads keys out of one JSON object and rejects any key left unread.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string child(const std::string& key) const { return path_ + "." + key; }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (const Json* v = find(key)) {
      if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        const bool ok = std::is_unsigned_v<T> ? v->is_number_unsigned()
                                              : v->is_number_integer();
        if (!ok) throw ConfigError(child(key) + ": expected an integer");
      }
      try {
        out = v->get<T>();
      } catch (const nlohmann::json::exception&) {
        throw ConfigError(child(key) + ": wrong type");
      }
    }
  }

  void read_vec2(const std::string& key, Eigen::Vector2d& out) {
    if (const Json* v = find(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() ||
          !(*v)[1].is_number()) {
        throw ConfigError(child(key) + ": expected [x, y]");
      }
      out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
    }
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (seen_.count(item.key()) == 0) {
        throw ConfigError(child(item.key()) + ": unknown key");
      }
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Enum, std::size_t N>
Enum parse_enum(const Json& v, const std::string& path,
                const std::array<std::pair<const char*, Enum>, N>& names) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    for (const auto& [name, value] : names) {
      if (s == name) return value;
    }
  }
  throw ConfigError(path + ": unexpected value " + v.dump());
}

constexpr std::array<std::pair<const char*, EyeSide>, 2> kEyeNames = {
    {{"left", EyeSide::kLeft}, {"right", EyeSide::kRight}}};
constexpr std::array<std::pair<const char*, Direction>, 4> kDirectionNames = {
    {{"outward", Direction::kOutward},
     {"inward", Direction::kInward},
     {"upward", Direction::kUpward},
     {"downward", Direction::kDownward}}};
constexpr std::array<std::pair<const char*, Normalizer>, 2> kNormalizerNames = {
    {{"none", Normalizer::kNone}, {"eye_width", Normalizer::kEyeWidth}}};
constexpr std::array<std::pair<const char*, ProbeAxis>, 3> kAxisNames = {
    {{"planar", ProbeAxis::kPlanar},
     {"eye_horizontal", ProbeAxis::kEyeHorizontal},
     {"eye_vertical", ProbeAxis::kEyeVertical}}};

template <typename Enum, std::size_t N>
const char* enum_name(Enum value,
                      const std::array<std::pair<const char*, Enum>, N>& names) {
  for (const auto& [name, v] : names) {
    if (v == value) return name;
  }
  return "?";
}

EyeIndices parse_eye_indices(const Json& j, const std::string& path,
                             EyeIndices eye) {
  ObjectReader r(j, path);
  if (const Json* contour = r.find("contour")) {
    if (!contour->is_array() || contour->size() != kContourSize) {
      throw ConfigError(r.child("contour") + ": expected 16 indices");
    }
    for (std::size_t k = 0; k < eye.contour.size(); ++k) {
      if (!(*contour)[k].is_number_integer()) {
        throw ConfigError(r.child("contour") + ": expected integers");
      }
      eye.contour[k] = (*contour)[k].get<Eigen::Index>();
    }
  }
  r.read("inner_corner", eye.inner_corner);
  r.read("outer_corner", eye.outer_corner);
  r.read("eye_center", eye.eye_center);
  r.finish();
  return eye;
}

DisplacementProbe<double> parse_probe(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  DisplacementProbe<double> p;
  const Json* eye = r.find("eye");
  const Json* direction = r.find("direction");
  if (eye == nullptr || direction == nullptr) {
    throw ConfigError(path + ": probe needs 'eye' and 'direction'");
  }
  p.eye = parse_enum(*eye, r.child("eye"), kEyeNames);
  p.direction = parse_enum(*direction, r.child("direction"), kDirectionNames);
  for (const char* key : {"vertex_a", "vertex_b", "d_neutral", "d_activated"}) {
    if (!j.contains(key)) throw ConfigError(path + ": missing '" + key + "'");
  }
  r.read("vertex_a", p.vertex_a);
  r.read("vertex_b", p.vertex_b);
  r.read("d_neutral", p.d_neutral);
  r.read("d_activated", p.d_activated);
  if (const Json* v = r.find("normalizer")) {
    p.normalizer = parse_enum(*v, r.child("normalizer"), kNormalizerNames);
  }
  if (const Json* v = r.find("axis")) {
    p.axis = parse_enum(*v, r.child("axis"), kAxisNames);
  }
  r.finish();
  return p;
}

SubjectProfile parse_profile(const Json& j, const std::string& path,
                             SubjectProfile p) {
  ObjectReader r(j, path);
  r.read("eye_width", p.eye_width);
  r.read("eye_height", p.eye_height);
  r.read_vec2("left_eye_center", p.left_eye_center);
  r.read_vec2("right_eye_center", p.right_eye_center);
  r.read("pupil_travel_x", p.pupil_travel_x);
  r.read("pupil_travel_y", p.pupil_travel_y);
  r.read_vec2("neutral_bias", p.neutral_bias);
  r.read("drift_amplitude", p.drift_amplitude);
  r.read("drift_period", p.drift_period);
  r.read("noise_sigma", p.noise_sigma);
  r.read("z_plane", p.z_plane);
  r.finish();
  return p;
}

PipelineConfig parse_config_json(const Json& j) {
  PipelineConfig c;
  ObjectReader r(j, "config");

  bool have_index_map = false;
  if (const Json* m = r.find("index_map")) {
    ObjectReader mr(*m, r.child("index_map"));
    for (const auto& [name, side] : kEyeNames) {
      if (const Json* eye = mr.find(name)) {
        c.index_map[side] = parse_eye_indices(*eye, mr.child(name), c.index_map[side]);
      }
    }
    mr.finish();
    have_index_map = true;
  }

  if (const Json* probes = r.find("probes")) {
    if (!probes->is_array()) throw ConfigError("config.probes: expected an array");
    std::vector<DisplacementProbe<double>> table;
    for (std::size_t i = 0; i < probes->size(); ++i) {
      table.push_back(parse_probe((*probes)[i],
                                  "config.probes[" + std::to_string(i) + "]"));
    }
    c.probes = ProbeTable<double>(table);
  } else if (have_index_map) {
    c.index_map.validate();
    c.probes = default_probe_table(c.index_map);
  }

  if (const Json* cal = r.find("calibration")) {
    ObjectReader cr(*cal, r.child("calibration"));
    auto& s = c.calibration;
    cr.read("calibrate_neutral", s.calibrate_neutral);
    cr.read("calibrate_activated", s.calibrate_activated);
    cr.read("thrs_variance", s.thrs_variance);
    cr.read("f_influence_initial", s.f_influence_initial);
    cr.read("f_annealing", s.f_annealing);
    cr.read("buffer_capacity", s.buffer_capacity);
    cr.read("sigma_floor_fraction", s.sigma_floor_fraction);
    cr.read("activated_gate", s.activated_gate);
    cr.finish();
  }

  if (const Json* sm = r.find("smoothing")) {
    ObjectReader sr(*sm, r.child("smoothing"));
    sr.read("enabled", c.smoothing.enabled);
    sr.read("alpha", c.smoothing.alpha);
    sr.finish();
  }

  if (const Json* sy = r.find("synth")) {
    ObjectReader sr(*sy, r.child("synth"));
    sr.read("frame_w_px", c.synth.frame_w_px);
    sr.read("frame_h_px", c.synth.frame_h_px);
    sr.read("roi_scale", c.synth.roi_scale);
    if (const Json* p = sr.find("profile")) {
      c.synth.profile = parse_profile(*p, sr.child("profile"), c.synth.profile);
    }
    sr.finish();
  }
  r.finish();

  c.validate();
  return c;
}

Json vec2(const Eigen::Vector2d& v) { return Json::array({v.x(), v.y()}); }

}  // namespace

PipelineConfig parse_config(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config_json(j);
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string dump_config(const PipelineConfig& c) {
  Json j;
  for (const auto& [name, side] : kEyeNames) {
    const EyeIndices& eye = c.index_map[side];
    j["index_map"][name] = {{"contour", eye.contour},
                            {"inner_corner", eye.inner_corner},
                            {"outer_corner", eye.outer_corner},
                            {"eye_center", eye.eye_center}};
  }
  j["probes"] = Json::array();
  for (const auto& p : c.probes.probes()) {
    j["probes"].push_back({{"eye", enum_name(p.eye, kEyeNames)},
                           {"direction", enum_name(p.direction, kDirectionNames)},
                           {"vertex_a", p.vertex_a},
                           {"vertex_b", p.vertex_b},
                           {"d_neutral", p.d_neutral},
                           {"d_activated", p.d_activated},
                           {"normalizer", enum_name(p.normalizer, kNormalizerNames)},
                           {"axis", enum_name(p.axis, kAxisNames)}});
  }
  const auto& s = c.calibration;
  j["calibration"] = {{"calibrate_neutral", s.calibrate_neutral},
                      {"calibrate_activated", s.calibrate_activated},
                      {"thrs_variance", s.thrs_variance},
                      {"f_influence_initial", s.f_influence_initial},
                      {"f_annealing", s.f_annealing},
                      {"buffer_capacity", s.buffer_capacity},
                      {"sigma_floor_fraction", s.sigma_floor_fraction},
                      {"activated_gate", s.activated_gate}};
  j["smoothing"] = {{"enabled", c.smoothing.enabled}, {"alpha", c.smoothing.alpha}};
  const auto& p = c.synth.profile;
  j["synth"] = {{"frame_w_px", c.synth.frame_w_px},
                {"frame_h_px", c.synth.frame_h_px},
                {"roi_scale", c.synth.roi_scale},
                {"profile",
                 {{"eye_width", p.eye_width},
                  {"eye_height", p.eye_height},
                  {"left_eye_center", vec2(p.left_eye_center)},
                  {"right_eye_center", vec2(p.right_eye_center)},
                  {"pupil_travel_x", p.pupil_travel_x},
                  {"pupil_travel_y", p.pupil_travel_y},
                  {"neutral_bias", vec2(p.neutral_bias)},
                  {"drift_amplitude", p.drift_amplitude},
                  {"drift_period", p.drift_period},
                  {"noise_sigma", p.noise_sigma},
                  {"z_plane", p.z_plane}}}};
  return j.dump(2) + "\n";
}

}  // namespace pupilrig
