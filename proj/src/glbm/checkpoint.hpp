/*
 * Copyright 2026 The glbm authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "glbm/network.hpp"

namespace glbm {

inline constexpr int kCheckpointVersion = 1;

using Metadata = std::vector<std::pair<std::string, std::string>>;

// Single-file checkpoint: a plain-text header (magic line, `key = value`
// metadata, tensor count, `end-header`) followed by one record per
// parameter: a text line `<name> <d0,d1,..> <byte count>` and the raw
// little-endian float32 payload.
void save_checkpoint(const std::filesystem::path& path, const Network<float>& net, int epoch,
                     const Metadata& extra = {});

struct LoadedCheckpoint {
  Network<float> net;
  int epoch = 0;
  int version = 0;
  Metadata metadata;

  // Value of a metadata key, or `fallback` when absent.
  std::string get(const std::string& key, const std::string& fallback = "") const;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

Metadata model_metadata(const ModelConfig& config);
ModelConfig model_config_from_metadata(const Metadata& metadata);

}  // namespace glbm
