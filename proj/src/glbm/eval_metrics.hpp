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

#include <string>

#include "glbm/image_io.hpp"
#include "glbm/tensor.hpp"

namespace glbm {

inline constexpr double kCqmLumaWeight = 0.9449;
inline constexpr double kCqmChromaWeight = 0.0551;
inline constexpr double kPsnrCap = 100.0;

struct MetricReport {
  double age = 0.0;     // average gray-level error
  double peps = 0.0;    // fraction of error pixels
  double pceps = 0.0;   // fraction of clustered error pixels
  double psnr = 0.0;    // dB
  double msssim = 0.0;
  double cqm = 0.0;     // dB
};

struct SbmOptions {
  double ep_threshold = 20.0;  // gray levels; error pixel when |diff| > threshold
  double peak = 255.0;         // L - 1
};

// Background-quality metrics of an estimated background against ground
// truth. Gray-based metrics use BT.601 luma rounded to 8 bit; CQM uses
// per-band PSNR in BT.601 YUV.
MetricReport sbm_metrics(const Image& gt, const Image& est, const SbmOptions& opts = {});

// 10 log10(peak^2 / mse), or kPsnrCap when mse == 0.
double psnr_from_mse(double mse, double peak = 255.0);

// Five-scale structural similarity of two same-size 8-bit images (luma).
double msssim(const Image& a, const Image& b);

struct BsScore {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
};

// Pixel-level precision/recall/F over all frames.
BsScore bs_scores(const MaskStack& pred, const MaskStack& gt);

// Column order of the metrics CSV.
std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& scene, const MetricReport& r);

}  // namespace glbm
