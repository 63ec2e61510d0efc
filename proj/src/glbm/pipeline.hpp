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
#include <vector>

#include "glbm/config.hpp"
#include "glbm/dataset.hpp"
#include "glbm/eval_metrics.hpp"
#include "glbm/flow_mask.hpp"
#include "glbm/network.hpp"
#include "glbm/synth.hpp"
#include "glbm/trainer.hpp"

namespace glbm {

// Typed views of a RunConfig.
ModelConfig model_config_from(const RunConfig& c);
TrainConfig train_config_from(const RunConfig& c);
FlowOptions flow_options_from(const RunConfig& c);
SynthSpec synth_spec_from(const RunConfig& c);
SbmOptions sbm_options_from(const RunConfig& c);

std::vector<SceneDescriptor> scan_from(const RunConfig& c, const std::filesystem::path& data_root);

// Motion masks at the model resolution, one stack per scene. Reads cached
// masks from `flow.mask_dir/<scene>/` when present, otherwise computes them.
std::vector<MaskStack> scene_masks(const RunConfig& c, const std::vector<SceneDescriptor>& scenes);

// Computes and writes `out_dir/<scene>/NNNNNN.png` masks (255 = moving).
void make_masks(const RunConfig& c, const std::filesystem::path& data_root, const std::filesystem::path& out_dir);

// Trains on every scene under `data_root`; also writes `out_dir/config.cfg`.
TrainResult train_run(const RunConfig& c, const std::filesystem::path& data_root, const std::filesystem::path& out_dir);

// Writes `out_dir/background.png` (median) or `out_dir/NNNNNN.png` (per frame).
std::vector<std::filesystem::path> estimate_run(Network<float>& net, const std::filesystem::path& scene_dir,
                                                BackgroundMode mode, const std::filesystem::path& out_dir);

// `background` is one image or a directory of per-frame images. Writes one
// 0/255 mask per frame to `out_dir`.
std::vector<std::filesystem::path> subtract_run(const RunConfig& c, const std::filesystem::path& scene_dir,
                                                const std::filesystem::path& background,
                                                const std::filesystem::path& out_dir);

MetricReport eval_sbm_run(const RunConfig& c, const std::filesystem::path& gt, const std::filesystem::path& est);

// Sorted mask images of two directories, compared frame by frame.
BsScore eval_bs_run(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir);

MaskStack read_mask_dir(const std::filesystem::path& dir);

}  // namespace glbm
