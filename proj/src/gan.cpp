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

#include "roadaug/gan.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "roadaug/image_io.hpp"
#include "roadaug/kernels.hpp"
#include "roadaug/optim.hpp"

namespace roadaug::gan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kLeakySlope = 0.2;

bool known_activation(const std::string& name) {
    return name == "relu" || name == "leaky_relu" || name == "tanh" ||
           name == "sigmoid" || name == "linear";
}

double apply_activation(const std::string& name, double v) {
    if (name == "relu") return v > 0.0 ? v : 0.0;
    if (name == "leaky_relu") return v > 0.0 ? v : kLeakySlope * v;
    if (name == "tanh") return std::tanh(v);
    // Matches the tape composite 0.5 * (tanh(x / 2) + 1) bit for bit.
    if (name == "sigmoid") return 0.5 * (std::tanh(v * 0.5) + 1.0);
    return v;
}

ad::ValueId tape_activation(ad::Tape& tape, const std::string& name,
                            ad::ValueId v) {
    if (name == "relu") return tape.relu(v);
    if (name == "leaky_relu") return tape.leaky_relu(v, kLeakySlope);
    if (name == "tanh") return tape.tanh(v);
    if (name == "sigmoid") return tape.sigmoid(v);
    return v;
}

}  // namespace

void MlpSpec::validate() const {
    if (layer_sizes.size() < 3)
        throw ContractError("MlpSpec: need input, at least one hidden and "
                            "output size");
    for (std::size_t s : layer_sizes)
        if (s == 0) throw ContractError("MlpSpec: layer sizes must be positive");
    if (!known_activation(hidden_activation) ||
        !known_activation(output_activation))
        throw ContractError("MlpSpec: unknown activation name");
}

std::vector<Tensor*> MlpNetwork::parameters() {
    std::vector<Tensor*> out;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        out.push_back(&weights[i]);
        out.push_back(&biases[i]);
    }
    return out;
}

std::vector<const Tensor*> MlpNetwork::parameters() const {
    std::vector<const Tensor*> out;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        out.push_back(&weights[i]);
        out.push_back(&biases[i]);
    }
    return out;
}

MlpNetwork make_mlp(const MlpSpec& spec, Rng& rng) {
    spec.validate();
    MlpNetwork net;
    net.spec = spec;
    for (std::size_t i = 0; i + 1 < spec.layer_sizes.size(); ++i) {
        const std::size_t fan_in = spec.layer_sizes[i];
        const std::size_t fan_out = spec.layer_sizes[i + 1];
        const double sigma = std::sqrt(2.0 / static_cast<double>(fan_in));
        Tensor w = Tensor::zeros({fan_in, fan_out});
        for (double& v : w.data) v = sigma * rng.normal();
        net.weights.push_back(std::move(w));
        net.biases.push_back(Tensor::zeros({1, fan_out}));
    }
    return net;
}

Tensor mlp_apply(const MlpNetwork& net, const Tensor& input) {
    if (input.cols() != net.spec.layer_sizes.front())
        throw ContractError("mlp_apply: input width mismatch");
    Tensor x = input;
    const std::size_t num_layers = net.weights.size();
    for (std::size_t i = 0; i < num_layers; ++i) {
        const Tensor& w = net.weights[i];
        Tensor y = Tensor::zeros({x.rows(), w.cols()});
        kernels::matmul(x.data.data(), w.data.data(), y.data.data(), x.rows(),
                        w.cols(), x.cols(), false, false);
        const Tensor& b = net.biases[i];
        for (std::size_t r = 0; r < y.rows(); ++r)
            for (std::size_t c = 0; c < y.cols(); ++c)
                y.at(r, c) += b.data[c];
        const std::string& act = i + 1 == num_layers
                                     ? net.spec.output_activation
                                     : net.spec.hidden_activation;
        for (double& v : y.data) v = apply_activation(act, v);
        x = std::move(y);
    }
    return x;
}

TapedMlp register_params(ad::Tape& tape, const MlpNetwork& net) {
    TapedMlp taped;
    for (std::size_t i = 0; i < net.weights.size(); ++i) {
        taped.params.push_back(tape.leaf(net.weights[i]));
        taped.params.push_back(tape.leaf(net.biases[i]));
    }
    return taped;
}

ad::ValueId mlp_forward(ad::Tape& tape, const MlpSpec& spec,
                        const TapedMlp& taped, ad::ValueId input) {
    const std::size_t num_layers = spec.layer_sizes.size() - 1;
    ad::ValueId x = input;
    const std::size_t batch = tape.value(input).rows();
    for (std::size_t i = 0; i < num_layers; ++i) {
        const ad::ValueId w = taped.params[2 * i];
        const ad::ValueId b = taped.params[2 * i + 1];
        ad::ValueId y = tape.matmul(x, w);
        y = tape.add(y, tape.broadcast_row(b, batch));
        const std::string& act = i + 1 == num_layers ? spec.output_activation
                                                     : spec.hidden_activation;
        x = tape_activation(tape, act, y);
    }
    return x;
}

void GanConfig::validate() const {
    if (noise_dim == 0 || roi_side == 0 || batch_size == 0 || n_critic == 0)
        throw ContractError("GanConfig: sizes must be positive");
    if (learning_rate <= 0.0) throw ContractError("GanConfig: learning rate");
    if (gp_lambda <= 0.0)
        throw ContractError("GanConfig: gradient-penalty weight must be > 0");
    if (generator_hidden.empty() || critic_hidden.empty())
        throw ContractError("GanConfig: need at least one hidden layer");
}

MlpSpec GanConfig::generator_spec() const {
    MlpSpec spec;
    spec.layer_sizes.push_back(noise_dim);
    for (std::size_t h : generator_hidden) spec.layer_sizes.push_back(h);
    spec.layer_sizes.push_back(roi_side * roi_side);
    spec.hidden_activation = "leaky_relu";
    spec.output_activation = "sigmoid";
    return spec;
}

MlpSpec GanConfig::critic_spec() const {
    MlpSpec spec;
    spec.layer_sizes.push_back(roi_side * roi_side);
    for (std::size_t h : critic_hidden) spec.layer_sizes.push_back(h);
    spec.layer_sizes.push_back(1);
    spec.hidden_activation = "leaky_relu";
    spec.output_activation = "linear";  // unbounded critic score
    return spec;
}

Tensor sample_interpolates(const Tensor& real_batch, const Tensor& fake_batch,
                           const std::vector<double>& eps) {
    if (!real_batch.same_shape(fake_batch))
        throw ContractError("sample_interpolates: batch shapes differ");
    if (eps.size() != real_batch.rows())
        throw ContractError("sample_interpolates: one epsilon per sample");
    Tensor out = real_batch;
    const std::size_t cols = real_batch.cols();
    for (std::size_t r = 0; r < real_batch.rows(); ++r) {
        const double e = eps[r];
        for (std::size_t c = 0; c < cols; ++c)
            out.at(r, c) = e * real_batch.at(r, c) +
                           (1.0 - e) * fake_batch.at(r, c);
    }
    return out;
}

ad::ValueId gradient_penalty_node(ad::Tape& tape, const MlpSpec& critic_spec,
                                  const TapedMlp& critic, ad::ValueId xhat,
                                  double lambda) {
    if (tape.value(xhat).rows() == 0)
        throw ContractError("gradient_penalty: empty batch");
    const ad::ValueId scores = mlp_forward(tape, critic_spec, critic, xhat);
    // Each sample's score depends only on its own row, so the gradient of
    // the sum recovers all per-sample gradients in one sweep.
    const ad::ValueId total = tape.sum(scores);
    const ad::ValueId g = tape.grad(total, std::array{xhat})[0];
    const ad::ValueId norms = tape.row_norm(g);
    return tape.scale(tape.mean(tape.square(tape.add_const(norms, -1.0))),
                      lambda);
}

ad::ValueId critic_loss_node(ad::Tape& tape, const MlpSpec& critic_spec,
                             const TapedMlp& critic, ad::ValueId real,
                             ad::ValueId fake, ad::ValueId xhat,
                             double lambda) {
    const ad::ValueId mean_fake =
        tape.mean(mlp_forward(tape, critic_spec, critic, fake));
    const ad::ValueId mean_real =
        tape.mean(mlp_forward(tape, critic_spec, critic, real));
    const ad::ValueId base = tape.sub(mean_fake, mean_real);
    if (lambda == 0.0) return base;
    return tape.add(base,
                    gradient_penalty_node(tape, critic_spec, critic, xhat,
                                          lambda));
}

double gradient_penalty(const MlpNetwork& critic, const Tensor& xhat_batch,
                        double lambda) {
    ad::Tape tape;
    const TapedMlp taped = register_params(tape, critic);
    const ad::ValueId xhat = tape.leaf(xhat_batch);
    const ad::ValueId p =
        gradient_penalty_node(tape, critic.spec, taped, xhat, lambda);
    const double v = tape.value(p).data[0];
    if (!std::isfinite(v))
        throw NumericalError("gradient penalty is not finite");
    return v;
}

double critic_loss(const MlpNetwork& critic, const Tensor& real_batch,
                   const Tensor& fake_batch, const Tensor& xhat_batch,
                   double lambda) {
    if (!real_batch.same_shape(fake_batch))
        throw ContractError("critic_loss: batch shapes differ");
    ad::Tape tape;
    const TapedMlp taped = register_params(tape, critic);
    const ad::ValueId loss = critic_loss_node(
        tape, critic.spec, taped, tape.leaf(real_batch),
        tape.leaf(fake_batch), tape.leaf(xhat_batch), lambda);
    return tape.value(loss).data[0];
}

double generator_loss(const MlpNetwork& critic, const Tensor& fake_batch) {
    if (fake_batch.rows() == 0)
        throw ContractError("generator_loss: empty batch");
    const Tensor scores = mlp_apply(critic, fake_batch);
    double s = 0.0;
    for (double v : scores.data) s += v;
    return -s / static_cast<double>(scores.rows());
}

namespace {

Tensor preprocess_rois(const std::vector<img::ImageBuffer>& rois,
                       std::size_t roi_side) {
    Tensor data = Tensor::zeros({rois.size(), roi_side * roi_side});
    for (std::size_t i = 0; i < rois.size(); ++i) {
        const img::ImageBuffer resized = img::resize_bilinear(
            img::to_gray(rois[i]), roi_side, roi_side);
        for (std::size_t j = 0; j < resized.size(); ++j)
            data.at(i, j) = resized.pixels[j];
    }
    return data;
}

Tensor draw_batch(const Tensor& data, Rng& rng, std::size_t batch_size) {
    Tensor batch = Tensor::zeros({batch_size, data.cols()});
    for (std::size_t i = 0; i < batch_size; ++i) {
        const std::size_t idx =
            static_cast<std::size_t>(rng.below(data.rows()));
        for (std::size_t j = 0; j < data.cols(); ++j)
            batch.at(i, j) = data.at(idx, j);
    }
    return batch;
}

Tensor draw_noise(Rng& rng, std::size_t batch_size, std::size_t dim) {
    Tensor z = Tensor::zeros({batch_size, dim});
    for (double& v : z.data) v = rng.normal();
    return z;
}

std::vector<Tensor> tensors_of(const std::vector<ad::ValueId>& ids,
                               const ad::Tape& tape) {
    std::vector<Tensor> out;
    out.reserve(ids.size());
    for (ad::ValueId id : ids) out.push_back(tape.value(id));
    return out;
}

}  // namespace

TrainResult train(const std::vector<img::ImageBuffer>& rois,
                  const GanConfig& config) {
    config.validate();
    if (rois.size() < config.batch_size)
        throw InputError("gan train: need at least " +
                         std::to_string(config.batch_size) +
                         " ROIs, got " + std::to_string(rois.size()));

    const Tensor data = preprocess_rois(rois, config.roi_side);

    // Separate streams so adding steps never perturbs the initialization.
    Rng init_rng(mix64(config.seed ^ 0x494E4954ull));  // "INIT"
    Rng train_rng(mix64(config.seed ^ 0x545241494Eull));  // "TRAIN"

    TrainResult result;
    result.checkpoint.config = config;
    result.checkpoint.generator = make_mlp(config.generator_spec(), init_rng);
    result.checkpoint.critic = make_mlp(config.critic_spec(), init_rng);
    MlpNetwork& gen = result.checkpoint.generator;
    MlpNetwork& critic = result.checkpoint.critic;

    optim::AdamConfig adam_config;
    adam_config.learning_rate = config.learning_rate;
    std::vector<Tensor*> gen_params = gen.parameters();
    std::vector<Tensor*> critic_params = critic.parameters();
    auto snapshot = [](const std::vector<Tensor*>& ps) {
        std::vector<Tensor> out;
        for (const Tensor* p : ps) out.push_back(*p);
        return out;
    };
    std::vector<Tensor> gen_snapshot = snapshot(gen_params);
    std::vector<Tensor> critic_snapshot = snapshot(critic_params);
    optim::AdamState adam_gen(gen_snapshot, adam_config);
    optim::AdamState adam_critic(critic_snapshot, adam_config);

    result.log.reserve(config.total_steps);
    for (std::size_t step = 1; step <= config.total_steps; ++step) {
        // Fixed draw order per step: real indices, noise, epsilons.
        const Tensor real = draw_batch(data, train_rng, config.batch_size);
        const Tensor z =
            draw_noise(train_rng, config.batch_size, config.noise_dim);
        std::vector<double> eps(config.batch_size);
        for (double& e : eps) e = train_rng.uniform();

        const Tensor fake = mlp_apply(gen, z);
        const Tensor xhat = sample_interpolates(real, fake, eps);

        ad::Tape tape;
        const TapedMlp taped = register_params(tape, critic);
        const ad::ValueId real_id = tape.leaf(real);
        const ad::ValueId fake_id = tape.leaf(fake);
        const ad::ValueId xhat_id = tape.leaf(xhat);

        const ad::ValueId mean_fake =
            tape.mean(mlp_forward(tape, critic.spec, taped, fake_id));
        const ad::ValueId mean_real =
            tape.mean(mlp_forward(tape, critic.spec, taped, real_id));
        const ad::ValueId loss_id =
            tape.add(tape.sub(mean_fake, mean_real),
                     gradient_penalty_node(tape, critic.spec, taped, xhat_id,
                                           config.gp_lambda));

        const double loss = tape.value(loss_id).data[0];
        const double w_est = tape.value(mean_real).data[0] -
                             tape.value(mean_fake).data[0];
        if (!std::isfinite(loss))
            throw NumericalError("non-finite critic loss at step " +
                                 std::to_string(step));

        std::vector<Tensor> grads;
        try {
            grads = tensors_of(tape.grad(loss_id, taped.params), tape);
        } catch (const NumericalError& e) {
            throw NumericalError("critic gradient failed at step " +
                                 std::to_string(step) + ": " + e.what());
        }
        std::vector<Tensor> params = snapshot(critic_params);
        adam_critic.step(params, grads);
        for (std::size_t i = 0; i < critic_params.size(); ++i)
            *critic_params[i] = std::move(params[i]);

        result.log.push_back({step, loss, w_est});

        if (step % config.n_critic == 0) {
            const Tensor zg =
                draw_noise(train_rng, config.batch_size, config.noise_dim);
            ad::Tape gtape;
            const TapedMlp gen_taped = register_params(gtape, gen);
            const TapedMlp critic_const = register_params(gtape, critic);
            const ad::ValueId fake_g = mlp_forward(
                gtape, gen.spec, gen_taped, gtape.leaf(zg));
            const ad::ValueId gloss = gtape.scale(
                gtape.mean(mlp_forward(gtape, critic.spec, critic_const,
                                       fake_g)),
                -1.0);
            if (!std::isfinite(gtape.value(gloss).data[0]))
                throw NumericalError("non-finite generator loss at step " +
                                     std::to_string(step));
            std::vector<Tensor> ggrads =
                tensors_of(gtape.grad(gloss, gen_taped.params), gtape);
            std::vector<Tensor> gparams = snapshot(gen_params);
            adam_gen.step(gparams, ggrads);
            for (std::size_t i = 0; i < gen_params.size(); ++i)
                *gen_params[i] = std::move(gparams[i]);
        }
    }
    return result;
}

namespace {

json spec_to_json(const MlpSpec& spec) {
    return json{{"layer_sizes", spec.layer_sizes},
                {"hidden_activation", spec.hidden_activation},
                {"output_activation", spec.output_activation}};
}

MlpSpec spec_from_json(const json& j) {
    MlpSpec spec;
    spec.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    spec.hidden_activation = j.at("hidden_activation").get<std::string>();
    spec.output_activation = j.at("output_activation").get<std::string>();
    return spec;
}

json network_to_json(const MlpNetwork& net) {
    json j;
    j["spec"] = spec_to_json(net.spec);
    j["weights"] = json::array();
    j["biases"] = json::array();
    for (const Tensor& w : net.weights) j["weights"].push_back(w.data);
    for (const Tensor& b : net.biases) j["biases"].push_back(b.data);
    return j;
}

MlpNetwork network_from_json(const json& j) {
    MlpNetwork net;
    net.spec = spec_from_json(j.at("spec"));
    net.spec.validate();
    const auto& sizes = net.spec.layer_sizes;
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        std::vector<double> w =
            j.at("weights").at(i).get<std::vector<double>>();
        std::vector<double> b =
            j.at("biases").at(i).get<std::vector<double>>();
        if (w.size() != sizes[i] * sizes[i + 1] || b.size() != sizes[i + 1])
            throw InputError("checkpoint weight shapes do not match spec");
        net.weights.emplace_back(
            std::vector<std::size_t>{sizes[i], sizes[i + 1]}, std::move(w));
        net.biases.emplace_back(std::vector<std::size_t>{1, sizes[i + 1]},
                                std::move(b));
    }
    return net;
}

json config_to_json(const GanConfig& c) {
    return json{{"noise_dim", c.noise_dim},
                {"roi_side", c.roi_side},
                {"learning_rate", c.learning_rate},
                {"total_steps", c.total_steps},
                {"batch_size", c.batch_size},
                {"gp_lambda", c.gp_lambda},
                {"n_critic", c.n_critic},
                {"seed", c.seed},
                {"generator_hidden", c.generator_hidden},
                {"critic_hidden", c.critic_hidden}};
}

GanConfig config_from_json(const json& j) {
    GanConfig c;
    c.noise_dim = j.at("noise_dim").get<std::size_t>();
    c.roi_side = j.at("roi_side").get<std::size_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.total_steps = j.at("total_steps").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.gp_lambda = j.at("gp_lambda").get<double>();
    c.n_critic = j.at("n_critic").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.generator_hidden =
        j.at("generator_hidden").get<std::vector<std::size_t>>();
    c.critic_hidden = j.at("critic_hidden").get<std::vector<std::size_t>>();
    return c;
}

json checkpoint_body(const Checkpoint& cp) {
    json j;
    j["format"] = "roadaug-gan-checkpoint-v1";
    j["config"] = config_to_json(cp.config);
    j["generator"] = network_to_json(cp.generator);
    j["critic"] = network_to_json(cp.critic);
    return j;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

}  // namespace

std::string checkpoint_digest(const Checkpoint& cp) {
    return hex64(fnv1a64(checkpoint_body(cp).dump()));
}

void save_checkpoint(const Checkpoint& cp, const fs::path& path) {
    json j = checkpoint_body(cp);
    j["digest"] = checkpoint_digest(cp);
    std::ofstream out(path);
    if (!out) throw InputError("cannot write checkpoint: " + path.string());
    out << j.dump(2) << "\n";
}

Checkpoint load_checkpoint(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read checkpoint: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("malformed checkpoint " + path.string() + ": " +
                         e.what());
    }
    try {
        Checkpoint cp;
        cp.config = config_from_json(j.at("config"));
        cp.generator = network_from_json(j.at("generator"));
        cp.critic = network_from_json(j.at("critic"));
        const std::string stored = j.at("digest").get<std::string>();
        if (stored != checkpoint_digest(cp))
            throw InputError("checkpoint digest mismatch (corrupt file): " +
                             path.string());
        return cp;
    } catch (const json::exception& e) {
        throw InputError("malformed checkpoint " + path.string() + ": " +
                         e.what());
    }
}

GalleryManifest generate_gallery(const Checkpoint& cp, std::size_t count,
                                 std::uint64_t seed,
                                 const fs::path& out_dir) {
    if (count == 0) throw ContractError("generate_gallery: count must be >= 1");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!fs::is_directory(out_dir))
        throw InputError("cannot create gallery directory: " +
                         out_dir.string());

    const std::string digest = checkpoint_digest(cp);
    const std::size_t side = cp.config.roi_side;
    GalleryManifest manifest;
    manifest.roi_side = side;
    manifest.entries.resize(count);

    for (std::size_t k = 0; k < count; ++k) {
        const std::uint64_t item_seed = derive_seed(seed, "gallery", k);
        Rng rng(item_seed);
        Tensor z = Tensor::zeros({1, cp.config.noise_dim});
        for (double& v : z.data) v = rng.normal();
        const Tensor sample = mlp_apply(cp.generator, z);

        img::ImageBuffer im(side, side, 1);
        im.pixels = sample.data;
        img::clamp01(im);
        const std::string name = "roi_" + std::to_string(k) + ".png";
        img::save_image(im, out_dir / name);
        manifest.entries[k] = {"roi_" + std::to_string(k), name, item_seed,
                               digest};
    }
    save_gallery_manifest(manifest, out_dir / "manifest.json");
    return manifest;
}

void save_gallery_manifest(const GalleryManifest& manifest,
                           const fs::path& path) {
    json j;
    j["roi_side"] = manifest.roi_side;
    j["entries"] = json::array();
    for (const GalleryEntry& e : manifest.entries)
        j["entries"].push_back({{"roi_id", e.roi_id},
                                {"file", e.file},
                                {"generation_seed", e.generation_seed},
                                {"checkpoint_digest", e.checkpoint_digest}});
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write gallery manifest: " + path.string());
    out << j.dump(2) << "\n";
}

GalleryManifest load_gallery_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot read gallery manifest: " + path.string());
    json j;
    try {
        in >> j;
        GalleryManifest manifest;
        manifest.roi_side = j.at("roi_side").get<std::size_t>();
        for (const json& e : j.at("entries"))
            manifest.entries.push_back(
                {e.at("roi_id").get<std::string>(),
                 e.at("file").get<std::string>(),
                 e.at("generation_seed").get<std::uint64_t>(),
                 e.at("checkpoint_digest").get<std::string>()});
        return manifest;
    } catch (const json::exception& e) {
        throw InputError("malformed gallery manifest " + path.string() +
                         ": " + e.what());
    }
}

std::vector<img::ImageBuffer> load_gallery_images(
    const GalleryManifest& manifest, const fs::path& dir) {
    std::vector<img::ImageBuffer> out;
    out.reserve(manifest.entries.size());
    for (const GalleryEntry& e : manifest.entries) {
        try {
            out.push_back(img::load_image(dir / e.file));
        } catch (const InputError& err) {
            throw InputError("gallery entry " + e.roi_id + " unreadable: " +
                             err.what());
        }
    }
    return out;
}

}  // namespace roadaug::gan
