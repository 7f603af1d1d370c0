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

// Drives the built binary end to end through every subcommand. The binary
// path arrives via the ROADAUG_BIN environment variable set by ctest.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "roadaug/dataset.hpp"
#include "support/test_util.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string binary_path() {
    const char* env = std::getenv("ROADAUG_BIN");
    REQUIRE_MESSAGE(env != nullptr, "ROADAUG_BIN must point at the binary");
    return env;
}

int run(const std::string& args, const fs::path& stdout_file = {}) {
    std::string cmd = binary_path() + " " + args + " 2>/dev/null";
    if (!stdout_file.empty()) cmd += " > " + stdout_file.string();
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

struct CliFixture {
    fs::path root;      // dataset
    fs::path out;       // output root
    fs::path config;    // config file

    CliFixture() {
        root = testutil::scratch_dir("cli_data");
        out = testutil::scratch_dir("cli_out");
        // 6 images: five carry 7 D40 boxes between them (0 and 2 have a
        // second box), the sixth is D00-only. The split seed below sends
        // exactly the D00 image to validation, so the training split holds
        // the full hand-counted 7 D40 ROIs.
        testutil::ToyDatasetSpec spec;
        spec.image_count = 6;
        spec.image_side = 72;
        spec.double_box_images = {0, 2};
        spec.other_class_images = {5};
        spec.seed = 3003;
        testutil::make_toy_dataset(root, spec);

        std::uint64_t split_seed = 0;
        {
            roadaug::data::DatasetIndex probe = roadaug::data::ingest(root);
            for (std::uint64_t s = 0; s < 64; ++s) {
                roadaug::data::split(probe, 0.9, s);
                bool d00_held_out = false;
                for (const auto& rec : probe.records)
                    d00_held_out =
                        d00_held_out ||
                        (rec.split == roadaug::data::Split::kValidation &&
                         rec.image_id == "img_05");
                if (d00_held_out) {
                    split_seed = s;
                    break;
                }
            }
        }

        config = out / "config.json";
        json j;
        j["dataset_root"] = root.string();
        j["output_root"] = out.string();
        j["seed"] = 5;
        j["split"] = {{"train_fraction", 0.9}, {"seed", split_seed}};
        j["gan"] = {{"roi_side", 12},  {"noise_dim", 8},
                    {"total_steps", 4}, {"batch_size", 4},
                    {"n_critic", 2},    {"generator_hidden", {16}},
                    {"critic_hidden", {16}}};
        j["gallery"] = {{"count", 5}};
        j["texture"] = {{"iterations", 2},
                        {"bank",
                         {{"layers",
                           json::array({{{"filters", 6}, {"kernel", 5},
                                         {"stride", 2}},
                                        {{"filters", 8}, {"kernel", 5},
                                         {"stride", 2}}})}}}};
        j["selection"] = {{"mode", "random_one_to_one_to_one"}};
        std::ofstream(config) << j.dump(2);
    }

    std::string flags() const { return "--config " + config.string(); }
};

}  // namespace

TEST_CASE("unknown subcommand exits 1 with usage") {
    CHECK(run("frobnicate") == 1);
    CHECK(run("") == 1);
}

TEST_CASE("missing inputs exit 2 and name what is missing") {
    CliFixture fx;
    CHECK(run("augment " + fx.flags()) == 2);       // no index yet
    CHECK(run("train-gan " + fx.flags()) == 2);     // no rois yet
    CHECK(run("gen-gallery " + fx.flags()) == 2);   // no checkpoint yet
}

TEST_CASE("full staged workflow runs clean end to end") {
    CliFixture fx;
    REQUIRE(run("ingest " + fx.flags()) == 0);
    CHECK(fs::exists(fx.out / "index.json"));
    CHECK(fs::exists(fx.out / "effective_config.json"));

    // Hand count: the training split holds 7 D40 boxes (see the fixture).
    const std::size_t expected_rois = 7;

    REQUIRE(run("extract-rois " + fx.flags()) == 0);
    std::size_t png_count = 0;
    for (const auto& entry : fs::directory_iterator(fx.out / "rois"))
        if (entry.path().extension() == ".png") ++png_count;
    CHECK(png_count == expected_rois);

    REQUIRE(run("train-gan " + fx.flags()) == 0);
    CHECK(fs::exists(fx.out / "checkpoint.json"));
    CHECK(fs::exists(fx.out / "gan_train_log.csv"));

    REQUIRE(run("gen-gallery " + fx.flags()) == 0);
    CHECK(fs::exists(fx.out / "gallery" / "manifest.json"));
    CHECK(fs::exists(fx.out / "gallery" / "roi_4.png"));

    REQUIRE(run("match " + fx.flags()) == 0);
    std::ifstream matches(fx.out / "matches.jsonl");
    std::size_t lines = 0;
    std::string line;
    while (std::getline(matches, line))
        if (!line.empty()) {
            const json j = json::parse(line);
            CHECK(j.contains("image_id"));
            CHECK(j.contains("roi_id"));
            CHECK(j.contains("score"));
            ++lines;
        }
    CHECK(lines == expected_rois);

    REQUIRE(run("synth-texture " + fx.flags()) == 0);
    std::size_t textures = 0;
    for (const auto& entry : fs::directory_iterator(fx.out / "textures"))
        if (entry.path().extension() == ".png") ++textures;
    CHECK(textures == expected_rois);

    // Dry run prints the assignment and writes no images.
    const fs::path dry = fx.out / "dry.txt";
    REQUIRE(run("augment --dry-run " + fx.flags(), dry) == 0);
    CHECK_FALSE(fs::exists(fx.out / "augmentation_manifest.json"));
    std::size_t dry_lines = 0;
    std::ifstream dry_in(dry);
    while (std::getline(dry_in, line))
        if (!line.empty()) ++dry_lines;
    CHECK(dry_lines > 0);

    REQUIRE(run("augment " + fx.flags()) == 0);
    CHECK(fs::exists(fx.out / "augmentation_manifest.json"));
    const json manifest =
        json::parse(std::ifstream(fx.out / "augmentation_manifest.json"));
    CHECK(manifest.at("records").size() == dry_lines);
    CHECK(manifest.at("assignment").size() == dry_lines);

    // Eligible images each produced exactly one severity version.
    for (const json& rec : manifest.at("records"))
        CHECK(fs::exists(fx.out / rec.at("output_image").get<std::string>()));

    // report: Table-style metrics in, deltas out.
    const fs::path metrics = fx.out / "metrics.json";
    std::ofstream(metrics) << R"([
        {"label": "baseline", "f1": 0.627, "map": 0.637},
        {"label": "augmented", "f1": 0.672, "map": 0.678}
    ])";
    REQUIRE(run("report --metrics " + metrics.string() + " --baseline baseline " +
                fx.flags()) == 0);
    CHECK(fs::exists(fx.out / "report.json"));
    CHECK(fs::exists(fx.out / "report.txt"));
}

TEST_CASE("augment with an empty gallery exits 2 naming the gallery path") {
    CliFixture fx;
    REQUIRE(run("ingest " + fx.flags()) == 0);
    fs::create_directories(fx.out / "gallery");
    std::ofstream(fx.out / "gallery" / "manifest.json")
        << R"({"roi_side": 12, "entries": []})";
    CHECK(run("augment " + fx.flags()) == 2);
}

TEST_CASE("jobs flag does not change output bytes") {
    CliFixture fx1, fx2;
    // Same dataset content for both fixtures.
    fs::remove_all(fx2.root);
    fs::copy(fx1.root, fx2.root, fs::copy_options::recursive);
    // Rewrite fx2's config to point at its own roots.
    json j = json::parse(std::ifstream(fx1.config));
    j["dataset_root"] = fx2.root.string();
    j["output_root"] = fx2.out.string();
    std::ofstream(fx2.config) << j.dump(2);

    for (const auto& [fx, jobs] :
         {std::pair<const CliFixture&, const char*>{fx1, "1"},
          std::pair<const CliFixture&, const char*>{fx2, "3"}}) {
        const std::string flags = fx.flags() + " --jobs " + jobs;
        REQUIRE(run("ingest " + flags) == 0);
        REQUIRE(run("extract-rois " + flags) == 0);
        REQUIRE(run("train-gan " + flags) == 0);
        REQUIRE(run("gen-gallery " + flags) == 0);
        REQUIRE(run("augment " + flags) == 0);
    }
    // index.json embeds absolute dataset paths; images and the
    // augmentation manifest must still match byte for byte.
    CHECK(testutil::trees_identical(fx1.out / "images", fx2.out / "images"));
    CHECK(testutil::read_file_bytes(fx1.out / "augmentation_manifest.json") ==
          testutil::read_file_bytes(fx2.out / "augmentation_manifest.json"));
}
