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

#ifndef ROADAUG_IMAGE_HPP
#define ROADAUG_IMAGE_HPP

#include <cstddef>
#include <vector>

#include "roadaug/errors.hpp"

namespace roadaug::img {

/// Pixels are reals in [0, 1], row-major, channel-interleaved.
/// 8-bit storage maps through v / 255 on load and round(v * 255) on save.
struct ImageBuffer {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 1;  // 1 or 3
    std::vector<double> pixels;

    ImageBuffer() = default;
    ImageBuffer(std::size_t h, std::size_t w, std::size_t c, double fill = 0.0)
        : height(h), width(w), channels(c), pixels(h * w * c, fill) {
        if (h == 0 || w == 0 || (c != 1 && c != 3))
            throw ContractError("ImageBuffer: invalid dimensions");
    }

    double& at(std::size_t y, std::size_t x, std::size_t c = 0) {
        return pixels[(y * width + x) * channels + c];
    }
    double at(std::size_t y, std::size_t x, std::size_t c = 0) const {
        return pixels[(y * width + x) * channels + c];
    }

    std::size_t size() const { return pixels.size(); }
};

/// Integer pixel box, half-open on the max edges.
struct Box2D {
    int xmin = 0;
    int ymin = 0;
    int xmax = 0;
    int ymax = 0;

    int width() const { return xmax - xmin; }
    int height() const { return ymax - ymin; }
    bool operator==(const Box2D&) const = default;
};

/// Throws ContractError unless 0 <= xmin < xmax <= width and likewise for y.
void validate_box(const Box2D& box, std::size_t width, std::size_t height);

ImageBuffer crop(const ImageBuffer& image, const Box2D& box);

/// Bilinear resize with half-pixel-center alignment; same-size is the
/// identity and output values stay inside the input range.
ImageBuffer resize_bilinear(const ImageBuffer& image, std::size_t out_h,
                            std::size_t out_w);

/// Luminance grayscale (0.299, 0.587, 0.114); pass-through on 1-channel.
ImageBuffer to_gray(const ImageBuffer& image);

/// Clamps all pixels into [0, 1].
void clamp01(ImageBuffer& image);

}  // namespace roadaug::img

#endif  // ROADAUG_IMAGE_HPP
