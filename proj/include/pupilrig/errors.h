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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pupilrig {

// Bad numeric argument (non-finite sample, non-positive dimension, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Vertex index outside the mesh it addresses.
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Invalid configuration: probe tables, calibrator or smoother settings.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Geometry too collapsed to normalize against (zero eye width, zero IED).
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unreadable trace data. Carries the 1-based line number, or 0
// when the error is not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& detail)
      : ParseError(line, detail, std::string()) {}

  std::size_t line() const { return line_; }
  const std::string& detail() const { return detail_; }

  // Same error, prefixed with the file it came from.
  ParseError in_file(const std::string& path) const {
    return ParseError(line_, detail_, path);
  }

 private:
  ParseError(std::size_t line, const std::string& detail,
             const std::string& path)
      : std::runtime_error(
            (path.empty() ? std::string() : path + ": ") +
            (line == 0 ? std::string() : "line " + std::to_string(line) + ": ") +
            detail),
        line_(line),
        detail_(detail) {}

  std::size_t line_;
  std::string detail_;
};

}  // namespace pupilrig
