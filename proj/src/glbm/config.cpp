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

#include "glbm/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "glbm/error.hpp"

namespace glbm {
namespace {

std::string_view trim(std::string_view s) {
  const auto not_space = [](char c) { return c != ' ' && c != '\t' && c != '\r' && c != '\n'; };
  while (!s.empty() && !not_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && !not_space(s.back())) s.remove_suffix(1);
  return s;
}

bool parse_int(std::string_view s, int& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool parse_real(std::string_view s, double& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool parse_int_list(std::string_view s, std::vector<int>& out) {
  out.clear();
  while (true) {
    const auto comma = s.find(',');
    int v = 0;
    if (!parse_int(trim(s.substr(0, comma)), v)) return false;
    out.push_back(v);
    if (comma == std::string_view::npos) return true;
    s.remove_prefix(comma + 1);
  }
}

std::vector<KeyInfo> build_key_table() {
  using K = KeyKind;
  return {
      {"dataset.layout", K::choice, "sbm-style", "frame directory layout: flat = root/<scene>/*.png, sbm-style = root/<scene>/input/*.png", {"flat", "sbm-style"}},
      {"dataset.height", K::integer, "128", "frame height after resizing (px)", {}},
      {"dataset.width", K::integer, "128", "frame width after resizing (px)", {}},
      {"dataset.max_frames", K::integer, "0", "maximum frames read per scene, 0 = all", {}},
      {"dataset.prefetch", K::integer, "2", "batches decoded ahead of the optimizer, 0 = synchronous", {}},
      {"flow.levels", K::integer, "4", "optical flow pyramid levels", {}},
      {"flow.iterations", K::integer, "5", "warping iterations per pyramid level", {}},
      {"flow.window_sigma", K::real, "2.0", "Gaussian integration window of the local flow solve (px)", {}},
      {"flow.kappa", K::real, "2.0", "motion threshold as a multiple of the mean flow magnitude", {}},
      {"flow.mask_window", K::integer, "40", "frames sharing one adaptive threshold when masking a whole scene", {}},
      {"flow.mask_dir", K::text, "", "directory of cached motion masks (make-masks output), empty = compute in memory", {}},
      {"prior.lambda", K::real, "1.0", "ridge added to the scaled graph Laplacian of the latent prior", {}},
      {"posterior.scale_semantics", K::choice, "precision", "meaning of the encoder's second head", {"precision", "variance"}},
      {"posterior.sampling", K::choice, "structured", "structured = clique-coupled sampling, mean_field = per-frame marginals", {"structured", "mean_field"}},
      {"model.channels", K::int_list, "32,64,128,256,256", "encoder channels per stride-2 stage; decoder mirrors", {}},
      {"model.latent_dim", K::integer, "32", "latent dimension d", {}},
      {"model.activation", K::choice, "leaky_relu", "hidden nonlinearity", {"relu", "leaky_relu", "elu", "tanh"}},
      {"model.scale_init", K::real, "5.0", "effective posterior precision scale at initialization", {}},
      {"model.seed", K::integer, "0", "parameter initialization seed", {}},
      {"loss.alpha", K::real, "0.01", "nuclear-norm weight", {}},
      {"loss.beta", K::real, "0.5", "l1 sparsity weight on moving pixels", {}},
      {"loss.kl_weight", K::real, "1.0", "multiplier on the KL term of the total loss", {}},
      {"train.optimizer", K::choice, "adam", "optimizer", {"adam"}},
      {"train.epochs", K::integer, "500", "training epochs", {}},
      {"train.clips_per_batch", K::integer, "3", "clips per batch", {}},
      {"train.clip_len", K::integer, "40", "consecutive frames per clip", {}},
      {"train.steps_per_epoch", K::integer, "0", "optimizer steps per epoch, 0 = frames / batch frames", {}},
      {"train.learning_rate", K::real, "0.001", "initial Adam learning rate", {}},
      {"train.lr_schedule", K::choice, "plateau", "learning-rate schedule", {"none", "step", "plateau"}},
      {"train.lr_factor", K::real, "0.5", "multiplicative learning-rate decay", {}},
      {"train.lr_patience", K::integer, "10", "plateau: epochs without improvement before decaying", {}},
      {"train.lr_step", K::integer, "100", "step: epochs between decays", {}},
      {"train.lr_min", K::real, "1e-6", "learning-rate floor", {}},
      {"train.grad_clip_norm", K::real, "5.0", "global gradient-norm clip", {}},
      {"train.save_every", K::integer, "50", "epochs between checkpoint writes", {}},
      {"train.seed", K::integer, "0", "batch sampling and noise seed", {}},
      {"eval.ep_threshold", K::real, "20", "error-pixel threshold (gray levels)", {}},
      {"eval.peak", K::real, "255", "peak value (L-1) in the PSNR numerator", {}},
      {"eval.mode", K::choice, "median", "background estimate: one median image or one per frame", {"median", "per_frame"}},
      {"eval.threshold", K::text, "otsu", "subtraction threshold: otsu or a difference in [0,1]", {}},
      {"eval.postproc", K::boolean, "false", "3x3 median cleanup of subtraction masks", {}},
      {"synth.scenes", K::integer, "3", "synthetic scenes", {}},
      {"synth.frames", K::integer, "60", "frames per synthetic scene", {}},
      {"synth.height", K::integer, "96", "synthetic frame height", {}},
      {"synth.width", K::integer, "96", "synthetic frame width", {}},
      {"synth.background", K::choice, "gradient", "synthetic background kind", {"gradient", "texture"}},
      {"synth.objects", K::integer, "2", "moving objects per scene", {}},
      {"synth.object_size", K::integer, "12", "object side / diameter (px)", {}},
      {"synth.object_shape", K::choice, "square", "object shape", {"square", "disk", "mixed"}},
      {"synth.velocity", K::real, "3.0", "object speed (px/frame)", {}},
      {"synth.intensity", K::integer, "-1", "object gray level, -1 = contrast with the background", {}},
      {"synth.jitter", K::integer, "0", "camera jitter amplitude (px)", {}},
      {"synth.drift", K::real, "0.0", "sinusoidal illumination drift amplitude (fraction)", {}},
      {"synth.seed", K::integer, "0", "generator seed", {}},
  };
}

void validate(const KeyInfo& info, std::string_view value) {
  const auto fail = [&](const std::string& why) {
    throw ConfigError("invalid value '" + std::string(value) + "' for " + info.key + ": " + why);
  };
  switch (info.kind) {
    case KeyKind::integer: {
      int v = 0;
      if (!parse_int(value, v)) fail("expected an integer");
      break;
    }
    case KeyKind::real: {
      double v = 0;
      if (!parse_real(value, v)) fail("expected a number");
      break;
    }
    case KeyKind::boolean:
      if (value != "true" && value != "false") fail("expected true or false");
      break;
    case KeyKind::choice:
      if (std::find(info.choices.begin(), info.choices.end(), value) == info.choices.end()) fail("not one of the allowed choices");
      break;
    case KeyKind::int_list: {
      std::vector<int> v;
      if (!parse_int_list(value, v)) fail("expected comma-separated integers");
      break;
    }
    case KeyKind::text:
      if (value.find('\n') != std::string_view::npos) fail("newline in value");
      break;
  }
}

}  // namespace

const std::vector<KeyInfo>& RunConfig::keys() {
  static const std::vector<KeyInfo> table = build_key_table();
  return table;
}

const KeyInfo* RunConfig::find_key(std::string_view key) {
  for (const auto& k : keys())
    if (k.key == key) return &k;
  return nullptr;
}

RunConfig::RunConfig() {
  for (const auto& k : keys()) values_.emplace(k.key, k.default_value);
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const KeyInfo* info = find_key(key);
  if (!info) throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  value = trim(value);
  validate(*info, value);
  values_.find(key)->second = std::string(value);
}

const std::string& RunConfig::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown configuration key '" + std::string(key) + "'");
  return it->second;
}

int RunConfig::get_int(std::string_view key) const {
  int v = 0;
  if (!parse_int(get(key), v)) throw ConfigError(std::string(key) + " is not an integer");
  return v;
}

double RunConfig::get_double(std::string_view key) const {
  double v = 0;
  if (!parse_real(get(key), v)) throw ConfigError(std::string(key) + " is not a number");
  return v;
}

bool RunConfig::get_bool(std::string_view key) const { return get(key) == "true"; }

std::vector<int> RunConfig::get_int_list(std::string_view key) const {
  std::vector<int> v;
  if (!parse_int_list(get(key), v)) throw ConfigError(std::string(key) + " is not an integer list");
  return v;
}

void RunConfig::merge_text(std::string_view text, std::string_view source) {
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": expected 'key = value'");
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  merge_text(ss.str(), path.string());
}

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig cfg;
  cfg.merge_text(text);
  return cfg;
}

std::string RunConfig::serialize() const {
  std::ostringstream out;
  for (const auto& k : keys()) out << k.key << " = " << get(k.key) << '\n';
  return out.str();
}

std::string describe_keys() {
  std::ostringstream out;
  for (const auto& k : RunConfig::keys()) {
    out << "  " << k.key << " (default: " << (k.default_value.empty() ? "\"\"" : k.default_value) << ")\n      "
        << k.description;
    if (!k.choices.empty()) {
      out << " [";
      for (std::size_t i = 0; i < k.choices.size(); ++i) out << (i ? "|" : "") << k.choices[i];
      out << "]";
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace glbm
