/*
 * Copyright 2026 The cofollow Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef COFOLLOW_TOOLS_MANIFEST_H_
#define COFOLLOW_TOOLS_MANIFEST_H_

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cofollow::cli {

// Provenance record written next to every output artifact.
struct RunManifest {
  std::string subcommand;
  nlohmann::json parameters = nlohmann::json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;

  // Adds a parameter; non-finite doubles are stored as strings.
  void set(const std::string& key, double value);
  template <typename T>
  void set(const std::string& key, const T& value) {
    parameters[key] = value;
  }

  // `created_at` is the only field that varies between identical runs.
  nlohmann::json to_json(bool with_timestamp = true) const;
  void write(const std::string& path) const;
};

// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

}  // namespace cofollow::cli

#endif  // COFOLLOW_TOOLS_MANIFEST_H_
