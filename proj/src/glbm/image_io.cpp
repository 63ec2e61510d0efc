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

#include "glbm/image_io.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "glbm/error.hpp"

namespace glbm {
namespace {

cv::Mat to_mat(const Image& img) {
  const int type = img.channels == 1 ? CV_8UC1 : CV_8UC3;
  return cv::Mat(img.height, img.width, type, const_cast<std::uint8_t*>(img.pixels.data()));
}

Image from_mat(const cv::Mat& m) {
  Image img(m.rows, m.cols, m.channels());
  cv::Mat dst(m.rows, m.cols, m.type(), img.pixels.data());
  m.copyTo(dst);
  return img;
}

}  // namespace

bool is_readable_image(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) return false;
  try {
    return cv::haveImageReader(path.string());
  } catch (const cv::Exception&) {
    return false;
  }
}

Image read_image(const std::filesystem::path& path) {
  cv::Mat m = cv::imread(path.string(), cv::IMREAD_ANYCOLOR | cv::IMREAD_ANYDEPTH);
  if (m.empty()) throw IoError("cannot decode image " + path.string());
  if (m.depth() == CV_16U) m.convertTo(m, CV_8U, 1.0 / 257.0);
  if (m.depth() != CV_8U) throw IoError("unsupported pixel depth in " + path.string());
  if (m.channels() == 4) cv::cvtColor(m, m, cv::COLOR_BGRA2RGB);
  else if (m.channels() == 3) cv::cvtColor(m, m, cv::COLOR_BGR2RGB);
  else if (m.channels() != 1) throw IoError("unsupported channel count in " + path.string());
  return from_mat(m);
}

void write_image(const std::filesystem::path& path, const Image& img) {
  require<ArgumentError>(img.channels == 1 || img.channels == 3, "write_image: 1 or 3 channels expected");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  cv::Mat m = to_mat(img);
  cv::Mat out;
  if (img.channels == 3) cv::cvtColor(m, out, cv::COLOR_RGB2BGR);
  else out = m;
  if (!cv::imwrite(path.string(), out)) throw IoError("cannot write image " + path.string());
}

Image resize_image(const Image& img, int height, int width) {
  require<ArgumentError>(height > 0 && width > 0, "resize_image: target size must be positive");
  if (img.height == height && img.width == width) return img;
  cv::Mat out;
  cv::resize(to_mat(img), out, cv::Size(width, height), 0, 0, cv::INTER_LINEAR);
  return from_mat(out);
}

void image_to_planar(const Image& img, int channels, float* out) {
  require<ArgumentError>(channels == 1 || channels == 3, "image_to_planar: 1 or 3 channels expected");
  const std::size_t plane = static_cast<std::size_t>(img.height) * img.width;
  const Image gray = (channels == 1 && img.channels == 3) ? to_gray(img) : Image{};
  for (int c = 0; c < channels; ++c) {
    float* dst = out + c * plane;
    for (std::size_t p = 0; p < plane; ++p) {
      std::uint8_t v;
      if (channels == 1) v = img.channels == 1 ? img.pixels[p] : gray.pixels[p];
      else v = img.channels == 1 ? img.pixels[p] : img.pixels[p * 3 + c];
      dst[p] = static_cast<float>(v) / 255.0f;
    }
  }
}

Image planar_to_image(const float* planes, int channels, int height, int width) {
  Image img(height, width, channels);
  const std::size_t plane = static_cast<std::size_t>(height) * width;
  for (int c = 0; c < channels; ++c)
    for (std::size_t p = 0; p < plane; ++p) {
      const float v = std::clamp(planes[c * plane + p], 0.0f, 1.0f);
      img.pixels[p * channels + c] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
    }
  return img;
}

Image to_gray(const Image& img) {
  if (img.channels == 1) return img;
  Image g(img.height, img.width, 1);
  const std::size_t plane = static_cast<std::size_t>(img.height) * img.width;
  for (std::size_t p = 0; p < plane; ++p) {
    const double y = 0.299 * img.pixels[p * 3] + 0.587 * img.pixels[p * 3 + 1] + 0.114 * img.pixels[p * 3 + 2];
    g.pixels[p] = static_cast<std::uint8_t>(std::lround(std::clamp(y, 0.0, 255.0)));
  }
  return g;
}

void write_mask(const std::filesystem::path& path, const std::uint8_t* mask, int height, int width) {
  Image img(height, width, 1);
  for (std::size_t p = 0; p < img.pixels.size(); ++p) img.pixels[p] = mask[p] ? 255 : 0;
  write_image(path, img);
}

std::vector<std::uint8_t> read_mask(const std::filesystem::path& path, int& height, int& width) {
  const Image img = to_gray(read_image(path));
  height = img.height;
  width = img.width;
  std::vector<std::uint8_t> m(img.pixels.size());
  for (std::size_t p = 0; p < m.size(); ++p) m[p] = img.pixels[p] ? 1 : 0;
  return m;
}

}  // namespace glbm
