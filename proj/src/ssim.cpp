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

#include "roadaug/ssim.hpp"

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "roadaug/kernels.hpp"

namespace roadaug::sim {

namespace {

img::ImageBuffer normalize(const img::ImageBuffer& im,
                           const SsimParams& params) {
    return img::resize_bilinear(img::to_gray(im), params.side, params.side);
}

}  // namespace

double ssim(const img::ImageBuffer& x, const img::ImageBuffer& y,
            const SsimParams& params) {
    if (x.size() == 0 || y.size() == 0)
        throw ContractError("ssim: empty image");
    if (params.c1 <= 0.0 || params.c2 <= 0.0 || params.side < 2)
        throw ContractError("ssim: invalid parameters");

    const img::ImageBuffer a = normalize(x, params);
    const img::ImageBuffer b = normalize(y, params);
    const std::size_t n = a.size();
    const double inv_n = 1.0 / static_cast<double>(n);

    double mu_x = 0.0, mu_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mu_x += a.pixels[i];
        mu_y += b.pixels[i];
    }
    mu_x *= inv_n;
    mu_y *= inv_n;

    double var_x = 0.0, var_y = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = a.pixels[i] - mu_x;
        const double dy = b.pixels[i] - mu_y;
        var_x += dx * dx;
        var_y += dy * dy;
        cov += dx * dy;
    }
    var_x *= inv_n;
    var_y *= inv_n;
    cov *= inv_n;

    const double c1 = params.constants_are_k ? params.c1 * params.c1
                                             : params.c1;
    const double c2 = params.constants_are_k ? params.c2 * params.c2
                                             : params.c2;
    const double num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2);
    const double den =
        (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2);
    return num / den;
}

MatchResult match_roi(const img::ImageBuffer& original,
                      const std::vector<img::ImageBuffer>& gallery,
                      const SsimParams& params) {
    if (gallery.empty()) throw InputError("match_roi: empty gallery");

    const std::size_t n = gallery.size();
    std::vector<double> scores(n);
    // The original is normalized once; candidates independently.
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (kernels::parallel_enabled())
#endif
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i)
        scores[static_cast<std::size_t>(i)] =
            ssim(original, gallery[static_cast<std::size_t>(i)], params);

    MatchResult best{0, scores[0]};
    for (std::size_t i = 1; i < n; ++i)
        if (scores[i] > best.score) best = {i, scores[i]};
    return best;
}

}  // namespace roadaug::sim
