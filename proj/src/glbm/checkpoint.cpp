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

#include "glbm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "glbm/error.hpp"

namespace fs = std::filesystem;

namespace glbm {
namespace {

constexpr const char* kMagic = "GLBM-CHECKPOINT";

static_assert(std::endian::native == std::endian::little, "checkpoint payloads assume a little-endian host");

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

const std::string* find(const Metadata& m, const std::string& key) {
  for (const auto& [k, v] : m)
    if (k == key) return &v;
  return nullptr;
}

std::string require_key(const Metadata& m, const std::string& key) {
  const std::string* v = find(m, key);
  if (!v) throw IoError("checkpoint metadata lacks '" + key + "'");
  return *v;
}

}  // namespace

Metadata model_metadata(const ModelConfig& c) {
  return {
      {"model.height", std::to_string(c.height)},
      {"model.width", std::to_string(c.width)},
      {"model.image_channels", std::to_string(c.image_channels)},
      {"model.channels", join(c.channels)},
      {"model.latent_dim", std::to_string(c.latent_dim)},
      {"model.activation", to_string(c.activation)},
      {"model.seed", std::to_string(c.seed)},
  };
}

ModelConfig model_config_from_metadata(const Metadata& m) {
  ModelConfig c;
  try {
    c.height = std::stoi(require_key(m, "model.height"));
    c.width = std::stoi(require_key(m, "model.width"));
    c.image_channels = std::stoi(require_key(m, "model.image_channels"));
    c.channels = split_ints(require_key(m, "model.channels"));
    c.latent_dim = std::stoi(require_key(m, "model.latent_dim"));
    c.activation = parse_activation(require_key(m, "model.activation"));
    c.seed = std::stoull(require_key(m, "model.seed"));
  } catch (const std::logic_error& e) {
    throw IoError(std::string("malformed model metadata in checkpoint: ") + e.what());
  }
  return c;
}

std::string LoadedCheckpoint::get(const std::string& key, const std::string& fallback) const {
  const std::string* v = find(metadata, key);
  return v ? *v : fallback;
}

void save_checkpoint(const fs::path& path, const Network<float>& net, int epoch, const Metadata& extra) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint " + tmp.string());
    out << kMagic << ' ' << kCheckpointVersion << '\n';
    out << "epoch = " << epoch << '\n';
    for (const auto& [k, v] : model_metadata(net.config())) out << k << " = " << v << '\n';
    for (const auto& [k, v] : extra) {
      if (k.find_first_of(" =\n") != std::string::npos || v.find('\n') != std::string::npos)
        throw ArgumentError("checkpoint metadata entries must be single-line key/value pairs");
      out << k << " = " << v << '\n';
    }
    out << "tensors = " << net.params().size() << '\n';
    out << "end-header\n";
    for (const auto& p : net.params()) {
      const std::size_t bytes = p.value.size() * sizeof(float);
      out << p.name << ' ' << join(p.shape) << ' ' << bytes << '\n';
      out.write(reinterpret_cast<const char*>(p.value.data()), static_cast<std::streamsize>(bytes));
      out << '\n';
    }
    if (!out) throw IoError("failed while writing checkpoint " + tmp.string());
  }
  fs::rename(tmp, path);
}

LoadedCheckpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::string line;
  std::getline(in, line);
  {
    std::istringstream magic(line);
    std::string word;
    int version = 0;
    magic >> word >> version;
    if (word != kMagic) throw IoError(path.string() + " is not a checkpoint");
    if (version != kCheckpointVersion)
      throw IoError("unsupported checkpoint version " + std::to_string(version));
  }

  Metadata meta;
  while (std::getline(in, line) && line != "end-header") {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw IoError("malformed checkpoint header line: " + line);
    meta.emplace_back(line.substr(0, eq), line.substr(eq + 3));
  }
  if (line != "end-header") throw IoError("truncated checkpoint header in " + path.string());

  LoadedCheckpoint ck{Network<float>(model_config_from_metadata(meta)), 0, kCheckpointVersion, {}};
  ck.epoch = std::stoi(require_key(meta, "epoch"));
  const std::size_t count = std::stoul(require_key(meta, "tensors"));
  if (count != ck.net.params().size())
    throw IoError("checkpoint holds " + std::to_string(count) + " tensors, model expects " +
                  std::to_string(ck.net.params().size()));

  for (auto& p : ck.net.params()) {
    if (!std::getline(in, line)) throw IoError("truncated checkpoint payload");
    std::istringstream rec(line);
    std::string name, shape;
    std::size_t bytes = 0;
    rec >> name >> shape >> bytes;
    if (name != p.name || split_ints(shape) != p.shape || bytes != p.value.size() * sizeof(float))
      throw IoError("checkpoint tensor '" + name + "' does not match model parameter '" + p.name + "'");
    in.read(reinterpret_cast<char*>(p.value.data()), static_cast<std::streamsize>(bytes));
    if (!in || in.get() != '\n') throw IoError("truncated tensor '" + name + "'");
  }
  ck.metadata = std::move(meta);
  return ck;
}

}  // namespace glbm
