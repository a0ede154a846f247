// Copyright 2026 The imblens Authors
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

#ifndef IMBLENS_TOOLS_CLI_RUN_MANIFEST_H_
#define IMBLENS_TOOLS_CLI_RUN_MANIFEST_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace imblens::cli {

// Provenance record embedded in every JSON output.
struct RunManifest {
  std::string command;
  std::vector<std::filesystem::path> inputs;
  nlohmann::json parameters = nlohmann::json::object();
  std::string tool_version;
  std::string timestamp;
};

// Hex SHA-256 of a file's bytes.
std::string Sha256File(const std::filesystem::path& path);

// UTC ISO-8601; honors SOURCE_DATE_EPOCH for reproducible runs.
std::string CurrentTimestamp();

std::string_view ToolVersion();

// Inputs are EMBX directories: every regular file inside is checksummed,
// in name order.
nlohmann::json ToJson(const RunManifest& manifest);

}  // namespace imblens::cli

#endif  // IMBLENS_TOOLS_CLI_RUN_MANIFEST_H_
