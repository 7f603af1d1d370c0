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

#include "roadaug/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace roadaug::img {

void validate_box(const Box2D& box, std::size_t width, std::size_t height) {
    if (box.xmin < 0 || box.ymin < 0 || box.xmin >= box.xmax ||
        box.ymin >= box.ymax ||
        static_cast<std::size_t>(box.xmax) > width ||
        static_cast<std::size_t>(box.ymax) > height)
        throw ContractError("box [" + std::to_string(box.xmin) + "," +
                            std::to_string(box.ymin) + "," +
                            std::to_string(box.xmax) + "," +
                            std::to_string(box.ymax) +
                            ") invalid for image " + std::to_string(width) +
                            "x" + std::to_string(height));
}

ImageBuffer crop(const ImageBuffer& image, const Box2D& box) {
    validate_box(box, image.width, image.height);
    ImageBuffer out(static_cast<std::size_t>(box.height()),
                    static_cast<std::size_t>(box.width()), image.channels);
    for (std::size_t y = 0; y < out.height; ++y) {
        const std::size_t sy = static_cast<std::size_t>(box.ymin) + y;
        const double* src =
            &image.pixels[(sy * image.width + static_cast<std::size_t>(box.xmin)) *
                          image.channels];
        double* dst = &out.pixels[y * out.width * out.channels];
        std::copy(src, src + out.width * out.channels, dst);
    }
    return out;
}

ImageBuffer resize_bilinear(const ImageBuffer& image, std::size_t out_h,
                            std::size_t out_w) {
    if (out_h == 0 || out_w == 0)
        throw ContractError("resize: output dimensions must be positive");
    if (out_h == image.height && out_w == image.width) return image;

    ImageBuffer out(out_h, out_w, image.channels);
    const double sy = static_cast<double>(image.height) /
                      static_cast<double>(out_h);
    const double sx = static_cast<double>(image.width) /
                      static_cast<double>(out_w);
    for (std::size_t oy = 0; oy < out_h; ++oy) {
        double fy = (static_cast<double>(oy) + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(image.height - 1));
        const std::size_t y0 = static_cast<std::size_t>(fy);
        const std::size_t y1 = std::min(y0 + 1, image.height - 1);
        const double wy = fy - static_cast<double>(y0);
        for (std::size_t ox = 0; ox < out_w; ++ox) {
            double fx = (static_cast<double>(ox) + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(image.width - 1));
            const std::size_t x0 = static_cast<std::size_t>(fx);
            const std::size_t x1 = std::min(x0 + 1, image.width - 1);
            const double wx = fx - static_cast<double>(x0);
            for (std::size_t c = 0; c < image.channels; ++c) {
                const double top = image.at(y0, x0, c) * (1.0 - wx) +
                                   image.at(y0, x1, c) * wx;
                const double bot = image.at(y1, x0, c) * (1.0 - wx) +
                                   image.at(y1, x1, c) * wx;
                out.at(oy, ox, c) = top * (1.0 - wy) + bot * wy;
            }
        }
    }
    return out;
}

ImageBuffer to_gray(const ImageBuffer& image) {
    if (image.channels == 1) return image;
    ImageBuffer out(image.height, image.width, 1);
    for (std::size_t y = 0; y < image.height; ++y)
        for (std::size_t x = 0; x < image.width; ++x)
            out.at(y, x) = 0.299 * image.at(y, x, 0) +
                           0.587 * image.at(y, x, 1) +
                           0.114 * image.at(y, x, 2);
    return out;
}

void clamp01(ImageBuffer& image) {
    for (double& v : image.pixels) v = std::clamp(v, 0.0, 1.0);
}

}  // namespace roadaug::img
