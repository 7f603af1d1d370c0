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

#ifndef ROADAUG_GAN_HPP
#define ROADAUG_GAN_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "roadaug/image.hpp"
#include "roadaug/rng.hpp"
#include "roadaug/tape.hpp"
#include "roadaug/tensor.hpp"

namespace roadaug::gan {

// Wasserstein GAN with gradient penalty over fully-connected networks.
// The critic emits an unbounded real score; its loss is
//   mean D(fake) - mean D(real) + lambda * mean (||grad_xhat D(xhat)|| - 1)^2
// and the penalty term is differentiated with respect to the critic
// parameters through the recorded backward pass (grad-of-grad).

struct MlpSpec {
    std::vector<std::size_t> layer_sizes;  // input, hidden..., output
    std::string hidden_activation = "leaky_relu";  // slope 0.2
    std::string output_activation = "sigmoid";

    void validate() const;
};

struct MlpNetwork {
    MlpSpec spec;
    std::vector<Tensor> weights;  // [in x out] per layer
    std::vector<Tensor> biases;   // [1 x out] per layer

    std::vector<Tensor*> parameters();
    std::vector<const Tensor*> parameters() const;
};

/// He-style seeded initialization (weights ~ N(0, 2/fan_in), zero biases).
MlpNetwork make_mlp(const MlpSpec& spec, Rng& rng);

/// Plain forward pass, no recording. input is [batch x in].
Tensor mlp_apply(const MlpNetwork& net, const Tensor& input);

/// Parameter handles for a network registered on a tape (weights then
/// biases, layer by layer).
struct TapedMlp {
    std::vector<ad::ValueId> params;
};

TapedMlp register_params(ad::Tape& tape, const MlpNetwork& net);
ad::ValueId mlp_forward(ad::Tape& tape, const MlpSpec& spec,
                        const TapedMlp& taped, ad::ValueId input);

struct GanConfig {
    std::size_t noise_dim = 64;
    std::size_t roi_side = 32;  // ROIs are resized to roi_side^2 grayscale
    double learning_rate = 2e-4;
    std::size_t total_steps = 10000;  // critic updates
    std::size_t batch_size = 32;
    double gp_lambda = 10.0;
    std::size_t n_critic = 5;  // critic steps per generator step
    std::uint64_t seed = 42;
    std::vector<std::size_t> generator_hidden{256, 512};
    std::vector<std::size_t> critic_hidden{512, 256};

    void validate() const;
    MlpSpec generator_spec() const;
    MlpSpec critic_spec() const;
};

/// xhat_i = eps_i * real_i + (1 - eps_i) * fake_i, one draw per sample.
Tensor sample_interpolates(const Tensor& real_batch, const Tensor& fake_batch,
                           const std::vector<double>& eps);

// Scalar loss evaluations (each runs on a private tape).
double gradient_penalty(const MlpNetwork& critic, const Tensor& xhat_batch,
                        double lambda);
double critic_loss(const MlpNetwork& critic, const Tensor& real_batch,
                   const Tensor& fake_batch, const Tensor& xhat_batch,
                   double lambda);
double generator_loss(const MlpNetwork& critic, const Tensor& fake_batch);

// Tape-level builders used by the training loop (and by the gradient
// checks, which differentiate the returned node).
ad::ValueId gradient_penalty_node(ad::Tape& tape, const MlpSpec& critic_spec,
                                  const TapedMlp& critic, ad::ValueId xhat,
                                  double lambda);
ad::ValueId critic_loss_node(ad::Tape& tape, const MlpSpec& critic_spec,
                             const TapedMlp& critic, ad::ValueId real,
                             ad::ValueId fake, ad::ValueId xhat,
                             double lambda);

struct Checkpoint {
    MlpNetwork generator;
    MlpNetwork critic;
    GanConfig config;
};

struct TrainStepLog {
    std::size_t step = 0;       // 1-based critic step
    double critic_loss = 0.0;
    double wasserstein = 0.0;   // E[D(real)] - E[D(fake)] on the step batch
};

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<TrainStepLog> log;
};

/// Deterministic training run: `total_steps` critic updates with one
/// generator update every `n_critic` critic steps. Aborts with
/// NumericalError (naming the step) if a loss goes non-finite.
TrainResult train(const std::vector<img::ImageBuffer>& rois,
                  const GanConfig& config);

std::string checkpoint_digest(const Checkpoint& cp);
void save_checkpoint(const Checkpoint& cp, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct GalleryEntry {
    std::string roi_id;
    std::string file;  // relative to the gallery directory
    std::uint64_t generation_seed = 0;
    std::string checkpoint_digest;
};

struct GalleryManifest {
    std::vector<GalleryEntry> entries;
    std::size_t roi_side = 0;
};

/// Writes `roi_<k>.png` files plus `manifest.json` into out_dir. Samples
/// use per-index derived seeds, so the result does not depend on how the
/// loop is scheduled.
GalleryManifest generate_gallery(const Checkpoint& cp, std::size_t count,
                                 std::uint64_t seed,
                                 const std::filesystem::path& out_dir);

void save_gallery_manifest(const GalleryManifest& manifest,
                           const std::filesystem::path& path);
GalleryManifest load_gallery_manifest(const std::filesystem::path& path);

/// Loads every entry's PNG; raises InputError naming the file on failure.
std::vector<img::ImageBuffer> load_gallery_images(
    const GalleryManifest& manifest, const std::filesystem::path& dir);

}  // namespace roadaug::gan

#endif  // ROADAUG_GAN_HPP
