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

#include "roadaug/blend.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "roadaug/kernels.hpp"
#include "roadaug/optim.hpp"

namespace roadaug::blend {

namespace {

int severity_rank(const std::string& label) {
    if (label == "mild") return 0;
    if (label == "moderate") return 1;
    if (label == "severe") return 2;
    return -1;
}

}  // namespace

std::vector<SeverityPreset> default_presets() {
    return make_presets(
        {{"mild", 0.25}, {"moderate", 0.50}, {"severe", 0.75}});
}

std::vector<SeverityPreset> make_presets(
    const std::vector<std::pair<std::string, double>>& table) {
    if (table.empty()) return default_presets();

    std::vector<SeverityPreset> out;
    std::map<int, double> alpha_by_rank;
    for (const auto& [label, alpha] : table) {
        const int rank = severity_rank(label);
        if (rank < 0)
            throw InputError("unknown severity label: " + label);
        if (alpha_by_rank.count(rank))
            throw InputError("duplicate severity label: " + label);
        if (alpha < 0.0 || alpha > 1.0)
            throw InputError("severity alpha must lie in [0, 1] (" + label +
                             ")");
        alpha_by_rank[rank] = alpha;
        out.push_back({label, alpha, 1.0 - alpha});
    }
    // Severity ordering: more severe presets must not mix in less damage.
    double prev = -1.0;
    for (const auto& [rank, alpha] : alpha_by_rank) {
        if (alpha < prev)
            throw InputError(
                "severity presets must have non-decreasing alpha from mild "
                "to severe");
        prev = alpha;
    }
    return out;
}

img::ImageBuffer weighted_mix(const img::ImageBuffer& roi_generated,
                              const img::ImageBuffer& texture, double alpha,
                              double beta) {
    if (roi_generated.height != texture.height ||
        roi_generated.width != texture.width ||
        roi_generated.channels != texture.channels)
        throw ContractError("weighted_mix: input dimensions differ");
    if (alpha < 0.0 || beta < 0.0)
        throw ContractError("weighted_mix: weights must be >= 0");
    img::ImageBuffer out = roi_generated;
    for (std::size_t i = 0; i < out.size(); ++i)
        out.pixels[i] = std::clamp(
            alpha * roi_generated.pixels[i] + beta * texture.pixels[i], 0.0,
            1.0);
    return out;
}

img::ImageBuffer poisson_blend(const img::ImageBuffer& target,
                               const img::ImageBuffer& patch,
                               const img::Box2D& box,
                               const PoissonOptions& options) {
    if (patch.channels != 1)
        throw ContractError("poisson_blend: patch must be grayscale");
    if (box.xmin < 1 || box.ymin < 1 ||
        static_cast<std::size_t>(box.xmax) + 1 > target.width ||
        static_cast<std::size_t>(box.ymax) + 1 > target.height ||
        box.width() < 1 || box.height() < 1)
        throw InputError(
            "poisson_blend: box must sit strictly inside the image with a "
            "1-pixel margin");
    if (patch.height != static_cast<std::size_t>(box.height()) ||
        patch.width != static_cast<std::size_t>(box.width()))
        throw ContractError("poisson_blend: patch size must equal box size");

    img::ImageBuffer out = target;

    const std::size_t bw = patch.width;
    const std::size_t bh = patch.height;
    if (bw < 3 || bh < 3) return out;  // no interior unknowns

    // Unknowns are the strict interior of the box; the box border ring is
    // the Dirichlet boundary.
    std::vector<int> index(bh * bw, -1);
    int n_unknowns = 0;
    for (std::size_t y = 1; y + 1 < bh; ++y)
        for (std::size_t x = 1; x + 1 < bw; ++x)
            index[y * bw + x] = n_unknowns++;

    const auto guidance = [&](std::size_t y, std::size_t x, std::size_t ny,
                              std::size_t nx, std::size_t channel) {
        const double gp = patch.at(y, x) - patch.at(ny, nx);
        if (!options.mixed_gradients) return gp;
        const std::size_t ty = static_cast<std::size_t>(box.ymin) + y;
        const std::size_t tx = static_cast<std::size_t>(box.xmin) + x;
        const std::size_t tny = static_cast<std::size_t>(box.ymin) + ny;
        const std::size_t tnx = static_cast<std::size_t>(box.xmin) + nx;
        const double gt =
            target.at(ty, tx, channel) - target.at(tny, tnx, channel);
        return std::abs(gt) > std::abs(gp) ? gt : gp;
    };

    const optim::LinearOperator apply_a = [&](std::span<const double> x,
                                              std::span<double> ax) {
        kernels::laplacian_apply(x.data(), index.data(), bh, bw, ax.data());
    };

    const std::array<std::pair<int, int>, 4> neighbours{
        {{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};

    for (std::size_t channel = 0; channel < target.channels; ++channel) {
        std::vector<double> b(static_cast<std::size_t>(n_unknowns), 0.0);
        for (std::size_t y = 1; y + 1 < bh; ++y) {
            for (std::size_t x = 1; x + 1 < bw; ++x) {
                double rhs = 0.0;
                for (const auto& [dy, dx] : neighbours) {
                    const std::size_t ny = y + static_cast<std::size_t>(dy);
                    const std::size_t nx = x + static_cast<std::size_t>(dx);
                    rhs += guidance(y, x, ny, nx, channel);
                    if (index[ny * bw + nx] < 0) {
                        // Dirichlet contribution from the box border ring.
                        rhs += target.at(
                            static_cast<std::size_t>(box.ymin) + ny,
                            static_cast<std::size_t>(box.xmin) + nx, channel);
                    }
                }
                b[static_cast<std::size_t>(index[y * bw + x])] = rhs;
            }
        }

        const std::size_t max_iter = 10 * static_cast<std::size_t>(n_unknowns);
        const optim::CgResult solution =
            optim::cg_solve(apply_a, b, options.tol, max_iter);
        if (!solution.converged)
            throw NumericalError(
                "poisson_blend: CG did not converge (relative residual " +
                std::to_string(solution.relative_residual) + ")");

        for (std::size_t y = 1; y + 1 < bh; ++y)
            for (std::size_t x = 1; x + 1 < bw; ++x) {
                const double v =
                    solution.x[static_cast<std::size_t>(index[y * bw + x])];
                out.at(static_cast<std::size_t>(box.ymin) + y,
                       static_cast<std::size_t>(box.xmin) + x, channel) =
                    std::clamp(v, 0.0, 1.0);
            }
    }
    return out;
}

}  // namespace roadaug::blend
