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

// Pipeline configuration file (JSON). Every key is optional; missing keys
// keep their defaults, unknown keys are rejected.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "pupilrig/pipeline.h"

namespace pupilrig {

// Throws ConfigError with the offending key path.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

// Pretty-printed JSON holding every setting.
std::string dump_config(const PipelineConfig& config);

}  // namespace pupilrig
