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

#ifndef ROADAUG_BLEND_HPP
#define ROADAUG_BLEND_HPP

#include <string>
#include <utility>
#include <vector>

#include "roadaug/image.hpp"

namespace roadaug::blend {

/// Labeled (alpha, beta) pair controlling mixed-damage severity;
/// beta = 1 - alpha by convention, larger alpha means more damage.
struct SeverityPreset {
    std::string label;  // mild | moderate | severe
    double alpha = 0.0;
    double beta = 0.0;
};

/// Validates labels (unique, known, alpha ordered mild <= moderate <=
/// severe) and fills beta = 1 - alpha. Defaults when called with an empty
/// table: mild 0.25, moderate 0.50, severe 0.75.
std::vector<SeverityPreset> make_presets(
    const std::vector<std::pair<std::string, double>>& table);

std::vector<SeverityPreset> default_presets();

/// Per-pixel alpha * generated + beta * texture, clamped to [0, 1].
/// Inputs must already share the target ROI's dimensions.
img::ImageBuffer weighted_mix(const img::ImageBuffer& roi_generated,
                              const img::ImageBuffer& texture, double alpha,
                              double beta);

struct PoissonOptions {
    double tol = 1e-8;
    // Guidance field: the patch gradient (plain seamless cloning). When
    // set, each guidance component is the larger-magnitude of the patch
    // and target gradients instead.
    bool mixed_gradients = false;
};

/// Gradient-domain embedding of a grayscale patch into `target` at `box`.
/// The discrete Poisson equation is solved per channel on the box interior
/// with Dirichlet values taken from the target on the box border; border
/// and outside pixels are returned bit-identical to the target. The box
/// must sit strictly inside the image (>= 1 pixel margin) and the patch
/// must match the box size.
img::ImageBuffer poisson_blend(const img::ImageBuffer& target,
                               const img::ImageBuffer& patch,
                               const img::Box2D& box,
                               const PoissonOptions& options = {});

}  // namespace roadaug::blend

#endif  // ROADAUG_BLEND_HPP
