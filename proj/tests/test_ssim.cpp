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

#include <cmath>

#include "roadaug/rng.hpp"
#include "roadaug/ssim.hpp"
#include "support/test_util.hpp"

using namespace roadaug;
using namespace roadaug::sim;

namespace {

img::ImageBuffer random_image(std::size_t h, std::size_t w, Rng& rng) {
    img::ImageBuffer im(h, w, 1);
    for (double& v : im.pixels) v = rng.uniform();
    return im;
}

// Definitional oracle: population moments computed from scratch. Assumes
// the inputs are already grayscale at the comparison size.
double ssim_oracle(const img::ImageBuffer& x, const img::ImageBuffer& y,
                   double c1, double c2) {
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x.pixels[i];
        my += y.pixels[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double vx = 0, vy = 0, cov = 0;
    for (std::size_t i = 0; i < n; ++i) {
        vx += (x.pixels[i] - mx) * (x.pixels[i] - mx);
        vy += (y.pixels[i] - my) * (y.pixels[i] - my);
        cov += (x.pixels[i] - mx) * (y.pixels[i] - my);
    }
    vx /= static_cast<double>(n);
    vy /= static_cast<double>(n);
    cov /= static_cast<double>(n);
    return ((2 * mx * my + c1) * (2 * cov + c2)) /
           ((mx * mx + my * my + c1) * (vx + vy + c2));
}

}  // namespace

TEST_CASE("ssim(x, x) == 1 exactly") {
    Rng rng(21);
    SsimParams params;
    params.side = 8;
    for (int trial = 0; trial < 20; ++trial) {
        const img::ImageBuffer x = random_image(8, 8, rng);
        CHECK(std::abs(ssim(x, x, params) - 1.0) <= 1e-12);
    }
}

TEST_CASE("ssim is exactly symmetric") {
    Rng rng(22);
    SsimParams params;
    params.side = 8;
    for (int trial = 0; trial < 20; ++trial) {
        const img::ImageBuffer x = random_image(8, 8, rng);
        const img::ImageBuffer y = random_image(8, 8, rng);
        CHECK(ssim(x, y, params) == ssim(y, x, params));
    }
}

TEST_CASE("constant pair closed form: 0 vs 1 gives C1/(1+C1)") {
    const img::ImageBuffer zero(8, 8, 1, 0.0);
    const img::ImageBuffer one(8, 8, 1, 1.0);
    const SsimParams params;  // C1 = 0.01, C2 = 0.03, side 32
    CHECK(std::abs(ssim(zero, one, params) - 0.01 / 1.01) <= 1e-12);
}

TEST_CASE("ssim equals the definitional oracle on random pairs") {
    Rng rng(23);
    SsimParams params;
    params.side = 8;  // inputs already 8x8 so no resampling is involved
    for (int trial = 0; trial < 100; ++trial) {
        const img::ImageBuffer x = random_image(8, 8, rng);
        const img::ImageBuffer y = random_image(8, 8, rng);
        CHECK(std::abs(ssim(x, y, params) -
                       ssim_oracle(x, y, params.c1, params.c2)) <= 1e-12);
    }
}

TEST_CASE("ssim is invariant under a common spatial permutation") {
    Rng rng(24);
    SsimParams params;
    params.side = 8;
    const img::ImageBuffer x = random_image(8, 8, rng);
    const img::ImageBuffer y = random_image(8, 8, rng);
    // Apply the same pixel permutation to both images.
    std::vector<std::size_t> perm(64);
    for (std::size_t i = 0; i < 64; ++i) perm[i] = i;
    rng.shuffle(perm);
    img::ImageBuffer xp(8, 8, 1), yp(8, 8, 1);
    for (std::size_t i = 0; i < 64; ++i) {
        xp.pixels[i] = x.pixels[perm[i]];
        yp.pixels[i] = y.pixels[perm[i]];
    }
    CHECK(std::abs(ssim(x, y, params) - ssim(xp, yp, params)) <= 1e-12);
}

TEST_CASE("color inputs are reduced to grayscale before comparison") {
    img::ImageBuffer red(4, 4, 3);
    img::ImageBuffer gray(4, 4, 1, 0.299);
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 4; ++x) red.at(y, x, 0) = 1.0;
    SsimParams params;
    params.side = 4;
    CHECK(std::abs(ssim(red, gray, params) - 1.0) <= 1e-9);
}

TEST_CASE("empty gallery is an input error") {
    const img::ImageBuffer x(4, 4, 1, 0.5);
    CHECK_THROWS_AS((void)match_roi(x, {}, SsimParams{}), InputError);
}

TEST_CASE("match_roi finds an exact copy with score 1") {
    Rng rng(31);
    SsimParams params;
    params.side = 8;
    const img::ImageBuffer original = random_image(8, 8, rng);
    std::vector<img::ImageBuffer> gallery;
    for (int i = 0; i < 10; ++i) gallery.push_back(random_image(8, 8, rng));
    gallery[6] = original;
    const MatchResult r = match_roi(original, gallery, params);
    CHECK(r.index == 6);
    CHECK(std::abs(r.score - 1.0) <= 1e-12);
}

TEST_CASE("match_roi on two constants follows the closed-form ordering") {
    // Original 0.5 against constants 0.4 and 0.9: the luminance term
    // (2 * 0.5 * v + C1) / (0.25 + v^2 + C1) prefers 0.4.
    SsimParams params;
    params.side = 8;
    const img::ImageBuffer original(8, 8, 1, 0.5);
    const std::vector<img::ImageBuffer> gallery{
        img::ImageBuffer(8, 8, 1, 0.4), img::ImageBuffer(8, 8, 1, 0.9)};
    const MatchResult r = match_roi(original, gallery, params);
    CHECK(r.index == 0);
}

TEST_CASE("match_roi equals a brute-force rescan and breaks ties low") {
    Rng rng(32);
    SsimParams params;
    params.side = 8;
    const img::ImageBuffer original = random_image(8, 8, rng);
    std::vector<img::ImageBuffer> gallery;
    for (int i = 0; i < 50; ++i) gallery.push_back(random_image(8, 8, rng));
    // Duplicate the best candidate later in the gallery to force a tie.
    const MatchResult first = match_roi(original, gallery, params);
    gallery.push_back(gallery[first.index]);
    const MatchResult tied = match_roi(original, gallery, params);
    CHECK(tied.index == first.index);  // lowest index wins

    double best = -2.0;
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < gallery.size(); ++i) {
        const double s = ssim(original, gallery[i], params);
        if (s > best) {
            best = s;
            best_index = i;
        }
    }
    CHECK(tied.index == best_index);
    CHECK(tied.score == best);

    // Rerunning is bit-identical.
    const MatchResult again = match_roi(original, gallery, params);
    CHECK(again.index == tied.index);
    CHECK(again.score == tied.score);
}
