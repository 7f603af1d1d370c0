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

#ifndef ROADAUG_TEXTURE_HPP
#define ROADAUG_TEXTURE_HPP

#include <cstdint>
#include <vector>

#include "roadaug/image.hpp"
#include "roadaug/tensor.hpp"

namespace roadaug::tex {

// Texture description via per-layer Gram matrices of a fixed multi-scale
// filter bank. The bank's kernels are seeded random (unit fan-in variance)
// and immutable after construction, so the whole pipeline stays
// self-contained and deterministic: no pretrained weights are loaded.

struct BankLayerSpec {
    std::size_t num_filters = 16;
    std::size_t kernel_size = 5;
    std::size_t stride = 2;
};

struct FeatureBankConfig {
    std::vector<BankLayerSpec> layers{
        {16, 5, 2}, {32, 5, 2}, {32, 5, 2}};
    std::uint64_t seed = 0x7E57BA4Bull;
};

class FeatureBank {
public:
    struct Layer {
        std::size_t in_channels = 1;
        std::size_t out_channels = 0;
        std::size_t kernel_size = 0;
        std::size_t stride = 0;
        std::vector<double> kernels;  // [out][in][k][k]
    };

    static FeatureBank make(const FeatureBankConfig& config);

    /// Same structure with caller-provided kernels (one flat [out][in][k][k]
    /// block per layer) instead of the seeded draw.
    static FeatureBank make_with_kernels(
        const FeatureBankConfig& config,
        const std::vector<std::vector<double>>& kernels);

    const std::vector<Layer>& layers() const { return layers_; }
    const FeatureBankConfig& config() const { return config_; }

    /// Smallest square input the deepest layer still produces one output
    /// position for.
    std::size_t min_input_side() const;

private:
    FeatureBankConfig config_;
    std::vector<Layer> layers_;
};

/// Post-rectifier activations per layer, stored both as spatial grids (for
/// backpropagation through the bank) and as N_l x M_l matrices.
struct FeatureMaps {
    struct LayerMaps {
        std::size_t height = 0;
        std::size_t width = 0;
        Tensor matrix;  // N_l x M_l, M_l = height * width, entries >= 0
    };
    std::vector<LayerMaps> layers;
};

/// Cascaded valid correlation + rectifier. Raises InputError naming the
/// limiting layer when the image is too small.
FeatureMaps extract_features(const img::ImageBuffer& gray,
                             const FeatureBank& bank);

/// G = F F^T for one layer's N x M feature matrix; symmetric by
/// construction.
Tensor gram(const Tensor& feature_matrix);

struct GramDescriptor {
    std::vector<Tensor> grams;  // one symmetric N_l x N_l matrix per layer
};

GramDescriptor gram_descriptor(const FeatureMaps& maps);

/// Per-layer dissimilarity: sum of squared Gram differences over
/// 4 N_l^2 M_l^2.
double layer_loss(const Tensor& g, const Tensor& g_hat, std::size_t n_l,
                  std::size_t m_l);

/// Weighted sum of layer losses; descriptors must come from the same bank.
double total_loss(const GramDescriptor& source, const GramDescriptor& target,
                  const std::vector<double>& weights,
                  const std::vector<std::size_t>& m_per_layer);

/// Analytic gradient of layer_loss with respect to the generated feature
/// matrix F_hat, gated to zero where F_hat < 0 (the rectifier gate):
///   (1 / (N^2 M^2)) * (G_hat - G) * F_hat  on the active set.
Tensor layer_loss_grad(const Tensor& f_hat, const Tensor& g,
                       const Tensor& g_hat, std::size_t n_l, std::size_t m_l);

struct TextureSynthConfig {
    std::vector<double> layer_weights;  // empty -> 1/L for every layer
    std::size_t iterations = 10;        // accepted optimizer steps
    std::uint64_t init_seed = 0;        // uniform [0,1) noise image
};

struct SynthesisResult {
    img::ImageBuffer image;             // clamped to [0,1], source-sized
    std::vector<double> loss_history;   // non-increasing
    bool converged = true;              // false if the line search stalled
};

/// Gram-matching synthesis: minimizes total_loss from a seeded noise image
/// with L-BFGS. Only the final output is clamped; the optimizer sees the
/// smooth objective. `init_override` replaces the noise start (used by
/// tests and calibration runs).
SynthesisResult synthesize_texture(const img::ImageBuffer& source_roi,
                                   const FeatureBank& bank,
                                   const TextureSynthConfig& config,
                                   const img::ImageBuffer* init_override =
                                       nullptr);

/// Gradient of the weighted Gram loss with respect to the image pixels:
/// the analytic layer gradients chained through the rectifiers and the
/// bank's correlations. Exposed for the finite-difference checks.
std::vector<double> texture_loss_image_grad(
    const img::ImageBuffer& gray, const FeatureBank& bank,
    const GramDescriptor& target, const std::vector<double>& weights);

double texture_loss_value(const img::ImageBuffer& gray,
                          const FeatureBank& bank,
                          const GramDescriptor& target,
                          const std::vector<double>& weights);

}  // namespace roadaug::tex

#endif  // ROADAUG_TEXTURE_HPP
