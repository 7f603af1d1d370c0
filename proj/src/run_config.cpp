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

#include "roadaug/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "roadaug/rng.hpp"

namespace roadaug::cfg {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw InputError("config: " + path + ": " + what);
}

void require_keys(const json& obj, const std::string& path,
                  const std::set<std::string>& allowed) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) fail(path.empty() ? key : path + "." + key,
                                      "unknown key");
}

template <typename T>
void read(const json& obj, const std::string& path, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail(path + "." + key, "type mismatch");
    }
}

void read_positive(const json& obj, const std::string& path, const char* key,
                   std::size_t& out) {
    read(obj, path, key, out);
    if (out == 0) fail(path + "." + key, "must be positive");
}

}  // namespace

RunConfig parse_config_text(const std::string& text,
                            const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InputError("config: cannot parse " + origin + ": " + e.what());
    }

    RunConfig c;
    require_keys(j, "",
                 {"dataset_root", "output_root", "target_class", "seed",
                  "jobs", "split", "gan", "gallery", "texture", "ssim",
                  "presets", "selection", "augment"});

    std::string dataset_root, output_root = c.output_root.string();
    read(j, "", "dataset_root", dataset_root);
    read(j, "", "output_root", output_root);
    c.dataset_root = dataset_root;
    c.output_root = output_root;
    read(j, "", "target_class", c.target_class);
    if (c.target_class.empty()) fail("target_class", "must be non-empty");
    read(j, "", "seed", c.seed);
    read(j, "", "jobs", c.jobs);
    if (c.jobs < 0) fail("jobs", "must be >= 0");

    bool have_split_seed = false, have_gan_seed = false,
         have_gallery_seed = false, have_bank_seed = false,
         have_texture_seed = false, have_selection_seed = false;

    if (j.contains("split")) {
        const json& s = j.at("split");
        require_keys(s, "split", {"train_fraction", "seed"});
        read(s, "split", "train_fraction", c.split_train_fraction);
        if (c.split_train_fraction <= 0.0 || c.split_train_fraction >= 1.0)
            fail("split.train_fraction", "must lie in (0, 1)");
        have_split_seed = s.contains("seed");
        read(s, "split", "seed", c.split_seed);
    }

    if (j.contains("gan")) {
        const json& g = j.at("gan");
        require_keys(g, "gan",
                     {"noise_dim", "roi_side", "learning_rate", "total_steps",
                      "batch_size", "gp_lambda", "n_critic", "seed",
                      "generator_hidden", "critic_hidden"});
        read_positive(g, "gan", "noise_dim", c.gan.noise_dim);
        read_positive(g, "gan", "roi_side", c.gan.roi_side);
        read(g, "gan", "learning_rate", c.gan.learning_rate);
        if (c.gan.learning_rate <= 0.0)
            fail("gan.learning_rate", "must be positive");
        read(g, "gan", "total_steps", c.gan.total_steps);
        read_positive(g, "gan", "batch_size", c.gan.batch_size);
        read(g, "gan", "gp_lambda", c.gan.gp_lambda);
        if (c.gan.gp_lambda <= 0.0) fail("gan.gp_lambda", "must be positive");
        read_positive(g, "gan", "n_critic", c.gan.n_critic);
        have_gan_seed = g.contains("seed");
        read(g, "gan", "seed", c.gan.seed);
        read(g, "gan", "generator_hidden", c.gan.generator_hidden);
        read(g, "gan", "critic_hidden", c.gan.critic_hidden);
        if (c.gan.generator_hidden.empty() || c.gan.critic_hidden.empty())
            fail("gan", "hidden layer lists must be non-empty");
    }

    if (j.contains("gallery")) {
        const json& g = j.at("gallery");
        require_keys(g, "gallery", {"count", "seed"});
        read_positive(g, "gallery", "count", c.gallery_count);
        have_gallery_seed = g.contains("seed");
        read(g, "gallery", "seed", c.gallery_seed);
    }

    if (j.contains("texture")) {
        const json& t = j.at("texture");
        require_keys(t, "texture",
                     {"iterations", "layer_weights", "init_seed", "bank"});
        read_positive(t, "texture", "iterations", c.texture.iterations);
        read(t, "texture", "layer_weights", c.texture.layer_weights);
        have_texture_seed = t.contains("init_seed");
        read(t, "texture", "init_seed", c.texture.init_seed);
        if (t.contains("bank")) {
            const json& b = t.at("bank");
            require_keys(b, "texture.bank", {"seed", "layers"});
            have_bank_seed = b.contains("seed");
            read(b, "texture.bank", "seed", c.bank.seed);
            if (b.contains("layers")) {
                c.bank.layers.clear();
                std::size_t li = 0;
                for (const json& layer : b.at("layers")) {
                    const std::string path =
                        "texture.bank.layers[" + std::to_string(li++) + "]";
                    require_keys(layer, path, {"filters", "kernel", "stride"});
                    tex::BankLayerSpec spec;
                    read_positive(layer, path, "filters", spec.num_filters);
                    read_positive(layer, path, "kernel", spec.kernel_size);
                    read_positive(layer, path, "stride", spec.stride);
                    c.bank.layers.push_back(spec);
                }
                if (c.bank.layers.empty())
                    fail("texture.bank.layers", "must be non-empty");
            }
        }
        if (!c.texture.layer_weights.empty() &&
            c.texture.layer_weights.size() != c.bank.layers.size())
            fail("texture.layer_weights",
                 "length must match texture.bank.layers");
    }

    if (j.contains("ssim")) {
        const json& s = j.at("ssim");
        require_keys(s, "ssim", {"c1", "c2", "side", "constants_are_k"});
        read(s, "ssim", "c1", c.ssim.c1);
        read(s, "ssim", "c2", c.ssim.c2);
        if (c.ssim.c1 <= 0.0 || c.ssim.c2 <= 0.0)
            fail("ssim", "C1 and C2 must be positive");
        read(s, "ssim", "side", c.ssim.side);
        if (c.ssim.side < 2) fail("ssim.side", "must be >= 2");
        read(s, "ssim", "constants_are_k", c.ssim.constants_are_k);
    }

    if (j.contains("presets")) {
        std::vector<std::pair<std::string, double>> table;
        std::size_t pi = 0;
        for (const json& p : j.at("presets")) {
            const std::string path = "presets[" + std::to_string(pi++) + "]";
            require_keys(p, path, {"label", "alpha"});
            std::string label;
            double alpha = 0.0;
            read(p, path, "label", label);
            read(p, path, "alpha", alpha);
            table.emplace_back(label, alpha);
        }
        c.presets = blend::make_presets(table);
    }

    if (j.contains("selection")) {
        const json& s = j.at("selection");
        require_keys(s, "selection", {"mode", "severity", "seed"});
        std::string mode = pipe::selection_mode_name(c.selection.mode);
        read(s, "selection", "mode", mode);
        c.selection.mode = pipe::selection_mode_from_name(mode);
        read(s, "selection", "severity", c.selection.severity_label);
        have_selection_seed = s.contains("seed");
        read(s, "selection", "seed", c.selection.seed);
        if (c.selection.mode == pipe::SelectionMode::kSingleSeverity) {
            bool known = false;
            for (const auto& p : c.presets)
                known = known || p.label == c.selection.severity_label;
            if (!known)
                fail("selection.severity", "label not in the preset table");
        }
    }

    if (j.contains("augment")) {
        const json& a = j.at("augment");
        require_keys(a, "augment",
                     {"fraction", "blend_tol", "mixed_gradients"});
        read(a, "augment", "fraction", c.augment_fraction);
        if (c.augment_fraction <= 0.0 || c.augment_fraction > 1.0)
            fail("augment.fraction", "must lie in (0, 1]");
        read(a, "augment", "blend_tol", c.poisson.tol);
        if (c.poisson.tol <= 0.0) fail("augment.blend_tol", "must be positive");
        read(a, "augment", "mixed_gradients", c.poisson.mixed_gradients);
    }

    // Nested seeds default to streams derived from the global seed.
    if (!have_split_seed) c.split_seed = derive_seed(c.seed, "split", 0);
    if (!have_gan_seed) c.gan.seed = derive_seed(c.seed, "gan", 0);
    if (!have_gallery_seed)
        c.gallery_seed = derive_seed(c.seed, "gallery", 0);
    if (!have_bank_seed) c.bank.seed = derive_seed(c.seed, "bank", 0);
    if (!have_texture_seed)
        c.texture.init_seed = derive_seed(c.seed, "texture", 0);
    if (!have_selection_seed)
        c.selection.seed = derive_seed(c.seed, "selection", 0);

    return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("config file not found: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path.string());
}

std::string effective_config_json(const RunConfig& c) {
    json j;
    j["dataset_root"] = c.dataset_root.string();
    j["output_root"] = c.output_root.string();
    j["target_class"] = c.target_class;
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    j["split"] = {{"train_fraction", c.split_train_fraction},
                  {"seed", c.split_seed}};
    j["gan"] = {{"noise_dim", c.gan.noise_dim},
                {"roi_side", c.gan.roi_side},
                {"learning_rate", c.gan.learning_rate},
                {"total_steps", c.gan.total_steps},
                {"batch_size", c.gan.batch_size},
                {"gp_lambda", c.gan.gp_lambda},
                {"n_critic", c.gan.n_critic},
                {"seed", c.gan.seed},
                {"generator_hidden", c.gan.generator_hidden},
                {"critic_hidden", c.gan.critic_hidden}};
    j["gallery"] = {{"count", c.gallery_count}, {"seed", c.gallery_seed}};
    json layers = json::array();
    for (const tex::BankLayerSpec& l : c.bank.layers)
        layers.push_back({{"filters", l.num_filters},
                          {"kernel", l.kernel_size},
                          {"stride", l.stride}});
    j["texture"] = {{"iterations", c.texture.iterations},
                    {"layer_weights", c.texture.layer_weights},
                    {"init_seed", c.texture.init_seed},
                    {"bank", {{"seed", c.bank.seed}, {"layers", layers}}}};
    j["ssim"] = {{"c1", c.ssim.c1},
                 {"c2", c.ssim.c2},
                 {"side", c.ssim.side},
                 {"constants_are_k", c.ssim.constants_are_k}};
    j["presets"] = json::array();
    for (const blend::SeverityPreset& p : c.presets)
        j["presets"].push_back({{"label", p.label}, {"alpha", p.alpha}});
    j["selection"] = {{"mode", pipe::selection_mode_name(c.selection.mode)},
                      {"severity", c.selection.severity_label},
                      {"seed", c.selection.seed}};
    j["augment"] = {{"fraction", c.augment_fraction},
                    {"blend_tol", c.poisson.tol},
                    {"mixed_gradients", c.poisson.mixed_gradients}};
    return j.dump(2) + "\n";
}

}  // namespace roadaug::cfg
