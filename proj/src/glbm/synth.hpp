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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "glbm/image_io.hpp"

namespace glbm {

enum class BackgroundKind { gradient, texture };
enum class ObjectShape { square, disk, mixed };

struct SynthSpec {
  int scenes = 3;
  int frames = 60;
  int height = 96;
  int width = 96;
  BackgroundKind background = BackgroundKind::gradient;
  int objects = 2;
  int object_size = 12;  // side length or diameter (px)
  ObjectShape object_shape = ObjectShape::square;
  double velocity = 3.0;  // px per frame
  int intensity = -1;     // gray value of objects, -1 = contrast with the background
  int jitter = 0;         // max global translation (px)
  double drift = 0.0;     // relative amplitude of a sinusoidal illumination change
  std::uint64_t seed = 0;

  // Throws ConfigError on an invalid spec, including a foreground area
  // fraction above 0.3.
  void validate() const;
  double foreground_fraction() const;
};

struct SynthScene {
  std::string scene_id;
  Image background;
  std::vector<Image> frames;
  std::vector<std::vector<std::uint8_t>> masks;  // 1 = foreground
};

// In-memory scene `index` of the dataset described by `spec`.
SynthScene synth_scene(const SynthSpec& spec, int index);

// Writes `out/<scene>/input/NNNNNN.png`, `out/<scene>/GT_background/background.png`,
// `out/<scene>/groundtruth/NNNNNN.png` and `out/manifest.txt`. Returns the
// scene ids.
std::vector<std::string> synth_generate(const SynthSpec& spec, const std::filesystem::path& out);

}  // namespace glbm
