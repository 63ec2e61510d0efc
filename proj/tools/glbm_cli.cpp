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

// Command-line front end over the C API.
//
//   glbm synth      --out DIR [--scenes N --frames N --seed S]
//   glbm make-masks --data DIR --out DIR
//   glbm train      --data DIR --out DIR
//   glbm estimate   --checkpoint FILE --scene DIR [--mode median|per_frame] [--out DIR]
//   glbm subtract   --scene DIR --background FILE|DIR --out DIR [--threshold otsu|T] [--postproc]
//   glbm eval-sbm   --gt FILE --est FILE [--name NAME]
//   glbm eval-bs    --pred DIR --gt DIR
//
// Every configuration key is also accepted as --<dotted.key>. Values are
// applied in order: defaults, config file (--config or $GLBM_CONFIG), --set,
// then flags.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glbm/glbm.h"

namespace {

constexpr int kUsage = 1;
constexpr int kFailure = 2;

struct UsageError {
  std::string what;
};

class Config {
 public:
  Config() {
    if (glbm_config_create(&h_) != GLBM_OK) throw std::runtime_error(glbm_last_error());
  }
  ~Config() { glbm_config_destroy(h_); }
  Config(const Config&) = delete;
  Config& operator=(const Config&) = delete;
  glbm_config* get() { return h_; }

  void set(const std::string& key, const std::string& value) {
    if (glbm_config_set(h_, key.c_str(), value.c_str()) != GLBM_OK) throw UsageError{glbm_last_error()};
  }
  void load(const std::string& path) {
    if (glbm_config_load_file(h_, path.c_str()) != GLBM_OK) throw UsageError{glbm_last_error()};
  }

 private:
  glbm_config* h_ = nullptr;
};

int report(glbm_status s, const char* what) {
  if (s == GLBM_OK) return 0;
  std::cerr << "glbm " << what << ": " << glbm_last_error() << '\n';
  return s == GLBM_ERR_CONFIG ? kUsage : kFailure;
}

std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-structured latent background models for video"};
  app.require_subcommand(1);
  app.get_formatter()->column_width(40);

  std::string config_path;
  std::vector<std::string> assignments;
  app.add_option("--config", config_path, "configuration file (falls back to $GLBM_CONFIG)");
  app.add_option("--set", assignments, "key=value override, repeatable")->allow_extra_args(false);

  // One option per configuration key, available before or after the subcommand.
  std::map<std::string, std::string> key_flags;
  std::map<std::string, CLI::Option*> key_options;
  auto* keys = app.add_option_group("Configuration");
  for (std::size_t i = 0; i < glbm_config_key_count(); ++i) {
    const std::string key = glbm_config_key_name(i);
    key_options[key] = keys->add_option("--" + key, key_flags[key], glbm_config_key_description(i))
                           ->default_str(glbm_config_key_default(i));
  }
  app.fallthrough();

  // Subcommand flags that alias configuration keys.
  std::map<std::string, std::string> aliases;
  auto alias = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    sub->add_option(flag, aliases[key], help + " (" + key + ")");
  };

  std::string out, data, checkpoint, scene, background, gt, est, pred, name;
  bool postproc = false;

  auto* synth = app.add_subcommand("synth", "generate a synthetic video dataset with ground truth");
  synth->add_option("--out", out, "output directory")->required();
  alias(synth, "--scenes", "synth.scenes", "number of scenes");
  alias(synth, "--frames", "synth.frames", "frames per scene");
  alias(synth, "--seed", "synth.seed", "random seed");

  auto* masks = app.add_subcommand("make-masks", "compute and cache optical-flow motion masks");
  masks->add_option("--data", data, "dataset root")->required();
  masks->add_option("--out", out, "mask directory")->required();

  auto* train = app.add_subcommand("train", "train a model on every scene of a dataset");
  train->add_option("--data", data, "dataset root")->required();
  train->add_option("--out", out, "run directory")->required();

  auto* estimate = app.add_subcommand("estimate", "estimate the background of one scene");
  estimate->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  estimate->add_option("--scene", scene, "scene directory")->required();
  estimate->add_option("--out", out, "output directory (default: <checkpoint dir>/estimates/<scene>)");
  alias(estimate, "--mode", "eval.mode", "median or per_frame");

  auto* subtract = app.add_subcommand("subtract", "foreground masks from frames and estimated backgrounds");
  subtract->add_option("--scene", scene, "scene directory")->required();
  subtract->add_option("--background", background, "background image or directory of per-frame images")->required();
  subtract->add_option("--out", out, "mask directory")->required();
  alias(subtract, "--threshold", "eval.threshold", "otsu or a difference in [0,1]");
  subtract->add_flag("--postproc", postproc, "3x3 median cleanup (eval.postproc)");

  auto* eval_sbm = app.add_subcommand("eval-sbm", "background-quality metrics as one CSV row");
  eval_sbm->add_option("--gt", gt, "ground-truth background")->required();
  eval_sbm->add_option("--est", est, "estimated background")->required();
  eval_sbm->add_option("--name", name, "scene column value (default: estimate file stem)");

  auto* eval_bs = app.add_subcommand("eval-bs", "pixel precision, recall and F-measure of foreground masks");
  eval_bs->add_option("--pred", pred, "predicted mask directory")->required();
  eval_bs->add_option("--gt", gt, "ground-truth mask directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  Config cfg;
  try {
    if (config_path.empty()) {
      if (const char* env = std::getenv("GLBM_CONFIG")) config_path = env;
    }
    if (!config_path.empty()) cfg.load(config_path);
    for (const auto& a : assignments) {
      const auto eq = a.find('=');
      if (eq == std::string::npos) throw UsageError{"--set expects key=value, got '" + a + "'"};
      auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t") + 1);
        return s;
      };
      cfg.set(trim(a.substr(0, eq)), trim(a.substr(eq + 1)));
    }
    for (const auto& [key, value] : key_flags)
      if (key_options[key]->count()) cfg.set(key, value);
    for (const auto& [key, value] : aliases)
      if (!value.empty()) cfg.set(key, value);
    if (postproc) cfg.set("eval.postproc", "true");
  } catch (const UsageError& e) {
    std::cerr << "glbm: " << e.what << "\n\n" << app.help();
    return kUsage;
  }

  if (*synth) {
    std::size_t n = 0;
    if (int rc = report(glbm_synth(cfg.get(), out.c_str(), &n), "synth")) return rc;
    std::cout << "wrote " << n << " scenes to " << out << '\n';
    return 0;
  }
  if (*masks) return report(glbm_make_masks(cfg.get(), data.c_str(), out.c_str()), "make-masks");
  if (*train) {
    double loss = 0.0;
    if (int rc = report(glbm_train(cfg.get(), data.c_str(), out.c_str(), &loss), "train")) return rc;
    std::cout << "final loss " << loss << ", checkpoint " << (std::filesystem::path(out) / "ckpt").string() << '\n';
    return 0;
  }
  if (*estimate) {
    glbm_model* model = nullptr;
    if (int rc = report(glbm_model_load(checkpoint.c_str(), &model), "estimate")) return rc;
    if (out.empty()) {
      std::filesystem::path s = std::filesystem::path(scene).lexically_normal();
      if (s.filename().empty()) s = s.parent_path();
      out = (std::filesystem::path(checkpoint).parent_path() / "estimates" / s.filename()).string();
    }
    std::size_t n = 0;
    std::size_t need = 0;
    glbm_config_get(cfg.get(), "eval.mode", nullptr, 0, &need);
    std::string mode(need, '\0');
    glbm_config_get(cfg.get(), "eval.mode", mode.data(), mode.size(), nullptr);
    mode.resize(need - 1);
    const int rc = report(glbm_estimate(model, scene.c_str(), mode.c_str(), out.c_str(), &n), "estimate");
    glbm_model_free(model);
    if (rc) return rc;
    std::cout << "wrote " << n << " background image(s) to " << out << '\n';
    return 0;
  }
  if (*subtract) {
    std::size_t n = 0;
    if (int rc = report(glbm_subtract(cfg.get(), scene.c_str(), background.c_str(), out.c_str(), &n), "subtract"))
      return rc;
    std::cout << "wrote " << n << " masks to " << out << '\n';
    return 0;
  }
  if (*eval_sbm) {
    glbm_sbm_report r{};
    if (int rc = report(glbm_eval_sbm(cfg.get(), gt.c_str(), est.c_str(), &r), "eval-sbm")) return rc;
    if (name.empty()) name = std::filesystem::path(est).stem().string();
    std::cout << "scene,age,peps,pceps,msssim,psnr,cqm\n"
              << name << ',' << csv_number(r.age) << ',' << csv_number(r.peps) << ',' << csv_number(r.pceps) << ','
              << csv_number(r.msssim) << ',' << csv_number(r.psnr) << ',' << csv_number(r.cqm) << '\n';
    return 0;
  }
  if (*eval_bs) {
    glbm_bs_score s{};
    if (int rc = report(glbm_eval_bs(pred.c_str(), gt.c_str(), &s), "eval-bs")) return rc;
    std::cout << "precision,recall,f_measure\n"
              << csv_number(s.precision) << ',' << csv_number(s.recall) << ',' << csv_number(s.f_measure) << '\n';
    return 0;
  }
  return kUsage;
}
