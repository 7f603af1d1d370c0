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

#include "roadaug/texture.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roadaug/kernels.hpp"
#include "roadaug/optim.hpp"
#include "roadaug/rng.hpp"

namespace roadaug::tex {

FeatureBank FeatureBank::make(const FeatureBankConfig& config) {
    if (config.layers.empty())
        throw ContractError("feature bank needs at least one layer");
    FeatureBank bank;
    bank.config_ = config;
    Rng rng(config.seed);
    std::size_t in_channels = 1;
    for (const BankLayerSpec& spec : config.layers) {
        if (spec.num_filters == 0 || spec.kernel_size == 0 ||
            spec.stride == 0)
            throw ContractError("feature bank layer sizes must be positive");
        Layer layer;
        layer.in_channels = in_channels;
        layer.out_channels = spec.num_filters;
        layer.kernel_size = spec.kernel_size;
        layer.stride = spec.stride;
        const std::size_t fan_in =
            in_channels * spec.kernel_size * spec.kernel_size;
        const double sigma = 1.0 / std::sqrt(static_cast<double>(fan_in));
        layer.kernels.resize(spec.num_filters * fan_in);
        for (double& w : layer.kernels) w = sigma * rng.normal();
        bank.layers_.push_back(std::move(layer));
        in_channels = spec.num_filters;
    }
    return bank;
}

FeatureBank FeatureBank::make_with_kernels(
    const FeatureBankConfig& config,
    const std::vector<std::vector<double>>& kernels) {
    FeatureBank bank = make(config);
    if (kernels.size() != bank.layers_.size())
        throw ContractError("make_with_kernels: layer count mismatch");
    for (std::size_t i = 0; i < kernels.size(); ++i) {
        if (kernels[i].size() != bank.layers_[i].kernels.size())
            throw ContractError("make_with_kernels: kernel size mismatch at "
                                "layer " +
                                std::to_string(i));
        bank.layers_[i].kernels = kernels[i];
    }
    return bank;
}

std::size_t FeatureBank::min_input_side() const {
    // Walk backwards: the deepest layer needs one output position.
    std::size_t side = 1;
    for (std::size_t i = layers_.size(); i-- > 0;) {
        const Layer& l = layers_[i];
        side = (side - 1) * l.stride + l.kernel_size;
    }
    return side;
}

namespace {

struct ForwardState {
    // Spatial activations per layer: [channels][h][w], post-rectifier.
    std::vector<std::vector<double>> activations;
    std::vector<std::size_t> heights, widths;
};

ForwardState forward_bank(const img::ImageBuffer& gray,
                          const FeatureBank& bank) {
    if (gray.channels != 1)
        throw ContractError("feature extraction expects a grayscale image");
    ForwardState state;
    std::vector<double> current = gray.pixels;
    std::size_t h = gray.height, w = gray.width, ch = 1;
    for (std::size_t li = 0; li < bank.layers().size(); ++li) {
        const FeatureBank::Layer& layer = bank.layers()[li];
        if (h < layer.kernel_size || w < layer.kernel_size)
            throw InputError(
                "image too small for feature bank layer " +
                std::to_string(li) + " (needs at least " +
                std::to_string(bank.min_input_side()) + " px per side)");
        const std::size_t oh = (h - layer.kernel_size) / layer.stride + 1;
        const std::size_t ow = (w - layer.kernel_size) / layer.stride + 1;
        std::vector<double> out(layer.out_channels * oh * ow);
        kernels::correlate2d(current.data(), ch, h, w, layer.kernels.data(),
                             layer.out_channels, layer.kernel_size,
                             layer.stride, out.data());
        for (double& v : out) v = v > 0.0 ? v : 0.0;
        state.activations.push_back(out);
        state.heights.push_back(oh);
        state.widths.push_back(ow);
        current = std::move(out);
        h = oh;
        w = ow;
        ch = layer.out_channels;
    }
    return state;
}

FeatureMaps to_feature_maps(const ForwardState& state,
                            const FeatureBank& bank) {
    FeatureMaps maps;
    for (std::size_t li = 0; li < state.activations.size(); ++li) {
        FeatureMaps::LayerMaps lm;
        lm.height = state.heights[li];
        lm.width = state.widths[li];
        const std::size_t n = bank.layers()[li].out_channels;
        const std::size_t m = lm.height * lm.width;
        // The spatial grid is already [channel][position]; that is exactly
        // the N x M matrix layout.
        lm.matrix = Tensor({n, m}, state.activations[li]);
        maps.layers.push_back(std::move(lm));
    }
    return maps;
}

std::vector<double> effective_weights(const std::vector<double>& weights,
                                      std::size_t num_layers) {
    if (weights.empty())
        return std::vector<double>(num_layers, 1.0 /
                                                   static_cast<double>(
                                                       num_layers));
    if (weights.size() != num_layers)
        throw ContractError("layer weight count does not match the bank");
    bool any_positive = false;
    for (double w : weights) {
        if (w < 0.0) throw ContractError("layer weights must be >= 0");
        any_positive = any_positive || w > 0.0;
    }
    if (!any_positive)
        throw ContractError("at least one layer weight must be positive");
    return weights;
}

}  // namespace

FeatureMaps extract_features(const img::ImageBuffer& gray,
                             const FeatureBank& bank) {
    return to_feature_maps(forward_bank(gray, bank), bank);
}

Tensor gram(const Tensor& feature_matrix) {
    const std::size_t n = feature_matrix.rows();
    const std::size_t m = feature_matrix.cols();
    Tensor g = Tensor::zeros({n, n});
    kernels::matmul(feature_matrix.data.data(), feature_matrix.data.data(),
                    g.data.data(), n, n, m, false, true);
    // Make the symmetry exact rather than round-trip dependent.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) g.at(j, i) = g.at(i, j);
    return g;
}

GramDescriptor gram_descriptor(const FeatureMaps& maps) {
    GramDescriptor d;
    for (const auto& lm : maps.layers) d.grams.push_back(gram(lm.matrix));
    return d;
}

double layer_loss(const Tensor& g, const Tensor& g_hat, std::size_t n_l,
                  std::size_t m_l) {
    if (!g.same_shape(g_hat))
        throw ContractError("layer_loss: Gram shapes differ");
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double d = g.data[i] - g_hat.data[i];
        s += d * d;
    }
    const double nm = static_cast<double>(n_l) * static_cast<double>(m_l);
    return s / (4.0 * nm * nm);
}

double total_loss(const GramDescriptor& source, const GramDescriptor& target,
                  const std::vector<double>& weights,
                  const std::vector<std::size_t>& m_per_layer) {
    if (source.grams.size() != target.grams.size() ||
        source.grams.size() != m_per_layer.size())
        throw ContractError("total_loss: descriptor layer counts differ");
    const std::vector<double> w =
        effective_weights(weights, source.grams.size());
    double loss = 0.0;
    for (std::size_t l = 0; l < source.grams.size(); ++l) {
        if (!source.grams[l].same_shape(target.grams[l]))
            throw ContractError(
                "total_loss: descriptors come from different banks");
        loss += w[l] * layer_loss(source.grams[l], target.grams[l],
                                  source.grams[l].rows(), m_per_layer[l]);
    }
    return loss;
}

Tensor layer_loss_grad(const Tensor& f_hat, const Tensor& g,
                       const Tensor& g_hat, std::size_t n_l,
                       std::size_t m_l) {
    if (f_hat.rows() != g.rows() || !g.same_shape(g_hat))
        throw ContractError("layer_loss_grad: inconsistent shapes");
    const std::size_t n = f_hat.rows();
    const std::size_t m = f_hat.cols();
    Tensor diff = Tensor::zeros({n, n});
    for (std::size_t i = 0; i < diff.size(); ++i)
        diff.data[i] = g_hat.data[i] - g.data[i];
    Tensor grad = Tensor::zeros({n, m});
    kernels::matmul(diff.data.data(), f_hat.data.data(), grad.data.data(), n,
                    m, n, false, false);
    const double nm = static_cast<double>(n_l) * static_cast<double>(m_l);
    const double scale = 1.0 / (nm * nm);
    for (std::size_t i = 0; i < grad.size(); ++i)
        grad.data[i] = f_hat.data[i] > 0.0 ? grad.data[i] * scale : 0.0;
    return grad;
}

namespace {

// Weighted Gram loss and image gradient for one forward state. The layer
// gradients chain down through the rectifier gates and the bank's
// correlations to the pixels.
double loss_and_grad(const ForwardState& state, const FeatureBank& bank,
                     const GramDescriptor& target,
                     const std::vector<double>& w, std::size_t img_h,
                     std::size_t img_w, std::vector<double>* image_grad) {
    const std::size_t num_layers = bank.layers().size();
    double loss = 0.0;

    std::vector<Tensor> f_mats(num_layers), g_mats(num_layers);
    for (std::size_t l = 0; l < num_layers; ++l) {
        const std::size_t n = bank.layers()[l].out_channels;
        const std::size_t m = state.heights[l] * state.widths[l];
        f_mats[l] = Tensor({n, m}, state.activations[l]);
        g_mats[l] = gram(f_mats[l]);
        if (!g_mats[l].same_shape(target.grams[l]))
            throw ContractError(
                "texture target does not match this bank/image size");
        loss += w[l] * layer_loss(g_mats[l], target.grams[l], n, m);
    }
    if (!image_grad) return loss;

    // delta holds d(loss)/d(activations) for the layer being processed.
    std::vector<double> delta;
    for (std::size_t l = num_layers; l-- > 0;) {
        const FeatureBank::Layer& layer = bank.layers()[l];
        const std::size_t n = layer.out_channels;
        const std::size_t m = state.heights[l] * state.widths[l];
        Tensor own = layer_loss_grad(f_mats[l], target.grams[l], g_mats[l],
                                     n, m);
        if (l == num_layers - 1) {
            delta.assign(own.data.begin(), own.data.end());
            for (double& v : delta) v *= w[l];
        } else {
            for (std::size_t i = 0; i < delta.size(); ++i)
                delta[i] += w[l] * own.data[i];
        }
        // Rectifier gate for the contribution arriving from above;
        // layer_loss_grad is already gated on its own term.
        for (std::size_t i = 0; i < delta.size(); ++i)
            if (state.activations[l][i] <= 0.0) delta[i] = 0.0;

        const std::size_t in_h = l == 0 ? img_h : state.heights[l - 1];
        const std::size_t in_w = l == 0 ? img_w : state.widths[l - 1];
        const std::size_t in_ch = layer.in_channels;
        std::vector<double> lower(in_ch * in_h * in_w);
        kernels::correlate2d_input_grad(
            delta.data(), n, state.heights[l], state.widths[l],
            layer.kernels.data(), in_ch, layer.kernel_size, layer.stride,
            lower.data(), in_h, in_w);
        delta = std::move(lower);
    }
    *image_grad = std::move(delta);
    return loss;
}

}  // namespace

double texture_loss_value(const img::ImageBuffer& gray,
                          const FeatureBank& bank,
                          const GramDescriptor& target,
                          const std::vector<double>& weights) {
    const ForwardState state = forward_bank(gray, bank);
    const std::vector<double> w =
        effective_weights(weights, bank.layers().size());
    return loss_and_grad(state, bank, target, w, gray.height, gray.width,
                         nullptr);
}

std::vector<double> texture_loss_image_grad(
    const img::ImageBuffer& gray, const FeatureBank& bank,
    const GramDescriptor& target, const std::vector<double>& weights) {
    const ForwardState state = forward_bank(gray, bank);
    const std::vector<double> w =
        effective_weights(weights, bank.layers().size());
    std::vector<double> grad;
    loss_and_grad(state, bank, target, w, gray.height, gray.width, &grad);
    return grad;
}

SynthesisResult synthesize_texture(const img::ImageBuffer& source_roi,
                                   const FeatureBank& bank,
                                   const TextureSynthConfig& config,
                                   const img::ImageBuffer* init_override) {
    const img::ImageBuffer source = img::to_gray(source_roi);
    const std::size_t h = source.height, w = source.width;
    const std::vector<double> weights =
        effective_weights(config.layer_weights, bank.layers().size());
    const GramDescriptor target = gram_descriptor(
        extract_features(source, bank));

    std::vector<double> x0(h * w);
    if (init_override) {
        if (init_override->height != h || init_override->width != w ||
            init_override->channels != 1)
            throw ContractError("synthesis init override has wrong shape");
        x0 = init_override->pixels;
    } else {
        Rng rng(config.init_seed);
        for (double& v : x0) v = rng.uniform();
    }

    const auto objective = [&](std::span<const double> x,
                               std::span<double> grad_out) {
        img::ImageBuffer im(h, w, 1);
        im.pixels.assign(x.begin(), x.end());
        const ForwardState state = forward_bank(im, bank);
        std::vector<double> grad;
        const double loss =
            loss_and_grad(state, bank, target, weights, h, w, &grad);
        std::copy(grad.begin(), grad.end(), grad_out.begin());
        return loss;
    };

    optim::LbfgsConfig lbfgs_config;
    const optim::LbfgsResult opt = optim::lbfgs_minimize(
        objective, std::move(x0), config.iterations, 1e-12, lbfgs_config);

    SynthesisResult result;
    result.image = img::ImageBuffer(h, w, 1);
    result.image.pixels = opt.x;
    img::clamp01(result.image);
    result.loss_history = opt.history;
    result.converged = !opt.line_search_failed;
    return result;
}

}  // namespace roadaug::tex
