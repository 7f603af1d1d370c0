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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "roadaug/run_config.hpp"
#include "support/test_util.hpp"

using namespace roadaug;
using namespace roadaug::cfg;

TEST_CASE("empty config object yields all defaults") {
    const RunConfig c = parse_config_text("{}");
    CHECK(c.target_class == "D40");
    CHECK(c.seed == 42);
    CHECK(c.split_train_fraction == 0.8);
    CHECK(c.gan.learning_rate == 2e-4);
    CHECK(c.gan.total_steps == 10000);
    CHECK(c.gan.gp_lambda == 10.0);
    CHECK(c.gan.n_critic == 5);
    CHECK(c.gan.roi_side == 32);
    CHECK(c.gan.noise_dim == 64);
    CHECK(c.gan.generator_hidden == std::vector<std::size_t>{256, 512});
    CHECK(c.gan.critic_hidden == std::vector<std::size_t>{512, 256});
    CHECK(c.ssim.c1 == 0.01);
    CHECK(c.ssim.c2 == 0.03);
    CHECK(c.ssim.side == 32);
    CHECK(c.texture.iterations == 10);
    CHECK(c.bank.layers.size() == 3);
    CHECK(c.presets.size() == 3);
    CHECK(c.augment_fraction == 1.0);
    CHECK(c.poisson.tol == 1e-8);
    // Nested seeds are derived from the global seed, deterministically.
    const RunConfig d = parse_config_text("{}");
    CHECK(c.split_seed == d.split_seed);
    CHECK(c.gan.seed == d.gan.seed);
    CHECK(c.gan.seed != c.split_seed);
}

TEST_CASE("explicit values are taken verbatim") {
    const RunConfig c = parse_config_text(R"({
        "gan": {"learning_rate": 0.0002, "total_steps": 123, "seed": 9},
        "ssim": {"c1": 0.02, "c2": 0.05},
        "selection": {"mode": "single_severity", "severity": "severe"},
        "presets": [{"label": "mild", "alpha": 0.1},
                    {"label": "severe", "alpha": 0.9}]
    })");
    CHECK(c.gan.learning_rate == 0.0002);
    CHECK(c.gan.total_steps == 123);
    CHECK(c.gan.seed == 9);
    CHECK(c.ssim.c1 == 0.02);
    CHECK(c.selection.mode == pipe::SelectionMode::kSingleSeverity);
    CHECK(c.presets.size() == 2);
    CHECK(c.presets[1].beta == doctest::Approx(0.1));
}

TEST_CASE("unknown keys are rejected with their path") {
    CHECK_THROWS_WITH_AS((void)parse_config_text(R"({"gan": {"learing_rate": 1}})"),
                         doctest::Contains("gan.learing_rate"), InputError);
    CHECK_THROWS_WITH_AS((void)parse_config_text(R"({"bogus": 1})"),
                         doctest::Contains("bogus"), InputError);
    CHECK_THROWS_WITH_AS(
        (void)parse_config_text(R"({"texture": {"bank": {"depth": 3}}})"),
        doctest::Contains("texture.bank.depth"), InputError);
}

TEST_CASE("type and range violations name the key") {
    CHECK_THROWS_WITH_AS(
        (void)parse_config_text(R"({"gan": {"total_steps": "many"}})"),
        doctest::Contains("gan.total_steps"), InputError);
    CHECK_THROWS_WITH_AS(
        (void)parse_config_text(R"({"split": {"train_fraction": 1.5}})"),
        doctest::Contains("split.train_fraction"), InputError);
    CHECK_THROWS_WITH_AS((void)parse_config_text(R"({"gan": {"gp_lambda": 0}})"),
                         doctest::Contains("gan.gp_lambda"), InputError);
    CHECK_THROWS_AS(
        (void)parse_config_text(
            R"({"selection": {"mode": "single_severity", "severity": "x"}})"),
        InputError);
}

TEST_CASE("malformed json and missing file are input errors") {
    CHECK_THROWS_AS((void)parse_config_text("{"), InputError);
    CHECK_THROWS_AS((void)parse_config(
                        testutil::scratch_dir("cfg") / "absent.json"),
                    InputError);
}

TEST_CASE("effective config echo re-parses to the same values") {
    const RunConfig c = parse_config_text(R"({
        "seed": 1001,
        "gan": {"roi_side": 16},
        "texture": {"bank": {"layers": [{"filters": 8, "kernel": 3,
                                         "stride": 1}]}}
    })");
    const std::string echoed = effective_config_json(c);
    const RunConfig back = parse_config_text(echoed);
    CHECK(back.seed == c.seed);
    CHECK(back.gan.roi_side == 16);
    CHECK(back.bank.layers.size() == 1);
    CHECK(back.bank.layers[0].kernel_size == 3);
    CHECK(back.split_seed == c.split_seed);
    CHECK(back.gallery_seed == c.gallery_seed);
    CHECK(effective_config_json(back) == echoed);
}

TEST_CASE("layer weight count must match the bank") {
    CHECK_THROWS_WITH_AS(
        (void)parse_config_text(R"({"texture": {"layer_weights": [1, 2]}})"),
        doctest::Contains("layer_weights"), InputError);
}
