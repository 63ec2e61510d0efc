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
#include <vector>

#include "glbm/tensor.hpp"

namespace glbm {

// 8-bit interleaved image, RGB channel order when channels == 3.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int h, int w, int c, std::uint8_t fill = 0)
      : height(h), width(w), channels(c), pixels(static_cast<std::size_t>(h) * w * c, fill) {}

  std::uint8_t& at(int y, int x, int ch) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + ch];
  }
  std::uint8_t at(int y, int x, int ch) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + ch];
  }
};

// True when the file carries a signature of a supported image codec.
bool is_readable_image(const std::filesystem::path& path);

// Decodes to 1 (gray) or 3 (RGB) channels; 16-bit sources are reduced to 8 bit.
Image read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const Image& img);

// Bilinear resize of an 8-bit image.
Image resize_image(const Image& img, int height, int width);

// Planar float frame in [0,1] with `channels` planes from an 8-bit image.
// Gray sources are replicated when channels == 3.
void image_to_planar(const Image& img, int channels, float* out);
Image planar_to_image(const float* planes, int channels, int height, int width);

// ITU-R BT.601 luma, rounded to 8 bit (identity on 1-channel images).
Image to_gray(const Image& img);

void write_mask(const std::filesystem::path& path, const std::uint8_t* mask, int height, int width);
// Any nonzero pixel becomes 1.
std::vector<std::uint8_t> read_mask(const std::filesystem::path& path, int& height, int& width);

}  // namespace glbm
