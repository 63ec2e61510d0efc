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
#include <vector>

#include "glbm/tensor.hpp"

namespace glbm {

struct FlowField {
  Plane u;  // horizontal displacement (px)
  Plane v;  // vertical displacement (px)
};

struct FlowOptions {
  int levels = 4;
  int iterations = 5;
  double window_sigma = 2.0;
  // Components below this magnitude are snapped to zero after the last level.
  double zero_tolerance = 1e-3;
};

// Dense coarse-to-fine flow: pyramidal local least-squares refinement with
// warping. The field is defined on the grid of `frame_a` and maps it onto
// `frame_b`: frame_a(x) ~ frame_b(x + flow(x)).
FlowField estimate_flow(const Plane& frame_a, const Plane& frame_b, const FlowOptions& opts = {});

struct MotionMask {
  MaskStack moving;  // 1 = moving pixel
  double tau = 0.0;  // threshold used (px)
};

// `flows[i]` relates frame i+1 to frame i of one clip. The threshold is
// kappa times the mean flow magnitude over all pairs; the mask of frame i+1
// marks magnitude > tau, and frame 0 reuses the mask of frame 1.
MotionMask motion_mask(const std::vector<FlowField>& flows, double kappa);

// Luma plane of frame `i` of a planar [n][C][H][W] tensor.
Plane frame_luma(const Tensor4<float>& frames, int i);

// Motion mask of a whole frame sequence. Flow pairs are processed in groups of
// `window` frames, each group with its own adaptive threshold.
MaskStack sequence_motion_mask(const Tensor4<float>& frames, const FlowOptions& opts, double kappa, int window);

}  // namespace glbm
