// Copyright 2026 The roadaug Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ROADAUG_SSIM_HPP
#define ROADAUG_SSIM_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "roadaug/image.hpp"

namespace roadaug::sim {

struct SsimParams {
    double c1 = 0.01;
    double c2 = 0.03;
    // Both images are resized to side x side grayscale before comparison.
    std::size_t side = 32;
    // When set, C1/C2 are reinterpreted as the windowed-SSIM K1/K2 with
    // dynamic range 1: Ci = (Ki * 1)^2. Off by default; the raw constants
    // are used exactly as configured.
    bool constants_are_k = false;
};

/// Single global-statistics structural similarity score in [-1, 1].
/// Means, variances and the covariance are population moments (divide by
/// n) over all pixels of the resized grayscale pair.
double ssim(const img::ImageBuffer& x, const img::ImageBuffer& y,
            const SsimParams& params);

struct MatchResult {
    std::size_t index = 0;  // position in the gallery
    double score = 0.0;
};

/// Exhaustive argmax scan over a gallery of candidate images. Ties break
/// toward the lowest index, and the reduction is order-independent, so the
/// parallel scan returns exactly what a serial one would.
MatchResult match_roi(const img::ImageBuffer& original,
                      const std::vector<img::ImageBuffer>& gallery,
                      const SsimParams& params);

}  // namespace roadaug::sim

#endif  // ROADAUG_SSIM_HPP
