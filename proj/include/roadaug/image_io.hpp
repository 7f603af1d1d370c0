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

#ifndef ROADAUG_IMAGE_IO_HPP
#define ROADAUG_IMAGE_IO_HPP

#include <filesystem>

#include "roadaug/image.hpp"

namespace roadaug::img {

/// Decodes a PNG or JPEG file (8-bit, 1 or 3 channels). Distinguishes
/// missing files, unsupported formats and corrupt data in the thrown
/// InputError. JPEG is accepted on ingestion only; all files the toolkit
/// writes are PNG.
ImageBuffer load_image(const std::filesystem::path& path);

/// Writes an 8-bit PNG. Values are clamped to [0, 1] and quantized with
/// round(v * 255); a save/load round trip of /255-representable pixels is
/// lossless.
void save_image(const ImageBuffer& image, const std::filesystem::path& path);

}  // namespace roadaug::img

#endif  // ROADAUG_IMAGE_IO_HPP
