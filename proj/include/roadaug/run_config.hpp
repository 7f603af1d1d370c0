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

#ifndef ROADAUG_RUN_CONFIG_HPP
#define ROADAUG_RUN_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "roadaug/blend.hpp"
#include "roadaug/gan.hpp"
#include "roadaug/pipeline.hpp"
#include "roadaug/ssim.hpp"
#include "roadaug/texture.hpp"

namespace roadaug::cfg {

/// Whole-run configuration. Parsing is strict: unknown keys are rejected
/// with their dotted path, omitted keys take the documented defaults, and
/// nested seeds left unset derive from the global seed. The effective
/// (fully populated) config is echoed into the output root for provenance.
struct RunConfig {
    std::filesystem::path dataset_root;
    std::filesystem::path output_root = "out";
    std::string target_class = "D40";
    std::uint64_t seed = 42;
    int jobs = 0;  // 0 = library default

    double split_train_fraction = 0.8;
    std::uint64_t split_seed = 0;  // derived from `seed` unless given

    gan::GanConfig gan;
    std::size_t gallery_count = 256;
    std::uint64_t gallery_seed = 0;  // derived unless given

    tex::FeatureBankConfig bank;
    tex::TextureSynthConfig texture;

    sim::SsimParams ssim;

    std::vector<blend::SeverityPreset> presets = blend::default_presets();

    pipe::SelectionPolicy selection;
    double augment_fraction = 1.0;
    blend::PoissonOptions poisson;
};

/// Strict JSON parse; see RunConfig. Raises InputError naming the key path
/// for unknown keys, type mismatches and invariant violations.
RunConfig parse_config(const std::filesystem::path& path);

/// Parse from an in-memory JSON document (used by tests and flag
/// overrides).
RunConfig parse_config_text(const std::string& text,
                            const std::string& origin = "<config>");

/// Fully populated JSON echo of the effective configuration.
std::string effective_config_json(const RunConfig& config);

}  // namespace roadaug::cfg

#endif  // ROADAUG_RUN_CONFIG_HPP
