// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "json.hpp"

#include "ddsyn/model.hpp"

namespace ddsyn::io {

using json = nlohmann::json;

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j, const std::string& name);

json system_to_json(const LtiSystem& sys);
LtiSystem system_from_json(const json& j);

json controller_to_json(const Controller& ctrl, Eigen::Index n_expected);
Controller controller_from_json(const json& j);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

void save_system(const std::string& path, const LtiSystem& sys);
LtiSystem load_system(const std::string& path);
void save_controller(const std::string& path, const Controller& ctrl, Eigen::Index n_expected);
Controller load_controller(const std::string& path);

std::uint64_t fnv1a64(std::string_view bytes);
std::string digest_hex(std::string_view bytes);
std::string file_digest(const std::string& path);

// Provenance record written next to every CLI output file.
struct RunManifest {
  std::string command;
  json parameters = json::object();
  std::uint64_t seed = 0;
  std::string tool_version;
  std::string created_at;
  std::map<std::string, std::string> inputs;   // path -> digest
  std::map<std::string, std::string> outputs;  // path -> digest

  json to_json() const;
};

std::string manifest_path_for(const std::string& out_path);
std::string utc_timestamp_now();
void write_manifest(const RunManifest& manifest, const std::string& out_path);

}  // namespace ddsyn::io
