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

#include <jpeglib.h>

#include <cstdio>
#include <fstream>

#include "roadaug/image.hpp"
#include "roadaug/image_io.hpp"
#include "roadaug/rng.hpp"
#include "support/test_util.hpp"

using namespace roadaug;
using namespace roadaug::img;

namespace {

// Minimal JPEG writer for the ingestion-path test; the library itself
// never encodes JPEG.
void write_jpeg(const ImageBuffer& im, const std::filesystem::path& path,
                int quality) {
    jpeg_compress_struct cinfo;
    jpeg_error_mgr jerr;
    cinfo.err = jpeg_std_error(&jerr);
    jpeg_create_compress(&cinfo);
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    REQUIRE(f != nullptr);
    jpeg_stdio_dest(&cinfo, f);
    cinfo.image_width = static_cast<JDIMENSION>(im.width);
    cinfo.image_height = static_cast<JDIMENSION>(im.height);
    cinfo.input_components = static_cast<int>(im.channels);
    cinfo.in_color_space = im.channels == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    std::vector<unsigned char> row(im.width * im.channels);
    while (cinfo.next_scanline < cinfo.image_height) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            const double v =
                im.pixels[cinfo.next_scanline * row.size() + i];
            row[i] = static_cast<unsigned char>(
                std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
        }
        unsigned char* ptr = row.data();
        jpeg_write_scanlines(&cinfo, &ptr, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
    std::fclose(f);
}

}  // namespace

TEST_CASE("png round trip is lossless for /255-representable pixels") {
    const auto dir = testutil::scratch_dir("image");
    Rng rng(1);
    for (const std::size_t channels : {std::size_t{1}, std::size_t{3}}) {
        ImageBuffer im(9, 13, channels);
        for (double& v : im.pixels)
            v = static_cast<double>(rng.below(256)) / 255.0;
        const auto path = dir / ("roundtrip_" + std::to_string(channels) +
                                 ".png");
        save_image(im, path);
        const ImageBuffer back = load_image(path);
        REQUIRE(back.height == im.height);
        REQUIRE(back.width == im.width);
        REQUIRE(back.channels == channels);
        CHECK(back.pixels == im.pixels);
    }
}

TEST_CASE("1x1 black image round-trips to exactly 0.0") {
    const auto dir = testutil::scratch_dir("image");
    save_image(ImageBuffer(1, 1, 1, 0.0), dir / "black.png");
    const ImageBuffer back = load_image(dir / "black.png");
    CHECK(back.pixels == std::vector<double>{0.0});
}

TEST_CASE("zero-byte file is a corrupt-data error") {
    const auto dir = testutil::scratch_dir("image");
    std::ofstream(dir / "empty.png").close();
    CHECK_THROWS_AS((void)load_image(dir / "empty.png"), InputError);
}

TEST_CASE("missing file and unsupported format are distinct input errors") {
    const auto dir = testutil::scratch_dir("image");
    CHECK_THROWS_WITH_AS((void)load_image(dir / "nope.png"),
                         doctest::Contains("not found"), InputError);
    std::ofstream(dir / "garbage.img") << "this is not an image at all";
    CHECK_THROWS_WITH_AS((void)load_image(dir / "garbage.img"),
                         doctest::Contains("unsupported"), InputError);
}

TEST_CASE("jpeg files decode on ingestion") {
    const auto dir = testutil::scratch_dir("image");
    ImageBuffer im(24, 32, 3);
    for (std::size_t y = 0; y < im.height; ++y)
        for (std::size_t x = 0; x < im.width; ++x) {
            im.at(y, x, 0) = 0.6;
            im.at(y, x, 1) = 0.4;
            im.at(y, x, 2) = 0.2;
        }
    write_jpeg(im, dir / "road.jpg", 95);
    const ImageBuffer back = load_image(dir / "road.jpg");
    CHECK(back.height == 24);
    CHECK(back.width == 32);
    CHECK(back.channels == 3);
    // Lossy round trip: flat colors survive within a few gray levels.
    for (std::size_t i = 0; i < back.size(); ++i)
        CHECK(std::abs(back.pixels[i] - im.pixels[i]) <= 4.0 / 255.0);

    write_jpeg(to_gray(im), dir / "gray.jpg", 95);
    const ImageBuffer gray = load_image(dir / "gray.jpg");
    CHECK(gray.channels == 1);

    std::ofstream(dir / "broken.jpg", std::ios::binary)
        << "\xFF\xD8\xFF\xE0 definitely not a scan";
    CHECK_THROWS_AS((void)load_image(dir / "broken.jpg"), InputError);
}

TEST_CASE("truncated png is a corrupt-data error") {
    const auto dir = testutil::scratch_dir("image");
    save_image(ImageBuffer(16, 16, 3, 0.5), dir / "ok.png");
    const std::string bytes = testutil::read_file_bytes(dir / "ok.png");
    std::ofstream out(dir / "cut.png", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    out.close();
    CHECK_THROWS_AS((void)load_image(dir / "cut.png"), InputError);
}

TEST_CASE("crop: full box is the identity, 1x1 box picks one pixel") {
    Rng rng(9);
    ImageBuffer im(7, 5, 3);
    for (double& v : im.pixels) v = rng.uniform();
    const ImageBuffer full = crop(im, {0, 0, 5, 7});
    CHECK(full.pixels == im.pixels);

    const ImageBuffer corner = crop(im, {0, 0, 1, 1});
    CHECK(corner.height == 1);
    CHECK(corner.width == 1);
    CHECK(corner.at(0, 0, 0) == im.at(0, 0, 0));
    CHECK(corner.at(0, 0, 2) == im.at(0, 0, 2));
}

TEST_CASE("crop: degenerate and out-of-bounds boxes are rejected") {
    const ImageBuffer im(4, 4, 1);
    CHECK_THROWS_AS((void)crop(im, {2, 0, 2, 3}), ContractError);
    CHECK_THROWS_AS((void)crop(im, {0, 0, 5, 4}), ContractError);
    CHECK_THROWS_AS((void)crop(im, {-1, 0, 2, 2}), ContractError);
}

TEST_CASE("resize: same size is the identity") {
    Rng rng(12);
    ImageBuffer im(32, 32, 1);
    for (double& v : im.pixels) v = rng.uniform();
    const ImageBuffer out = resize_bilinear(im, 32, 32);
    CHECK(out.pixels == im.pixels);
}

TEST_CASE("resize: constant images stay constant at any size") {
    const ImageBuffer im(8, 6, 3, 0.37);
    for (const auto [h, w] : {std::pair<std::size_t, std::size_t>{3, 17},
                              {20, 2},
                              {1, 1},
                              {13, 13}}) {
        const ImageBuffer out = resize_bilinear(im, h, w);
        for (double v : out.pixels) CHECK(v == doctest::Approx(0.37).epsilon(1e-15));
    }
}

TEST_CASE("resize: output range stays inside the input range") {
    Rng rng(77);
    for (int trial = 0; trial < 5; ++trial) {
        ImageBuffer im(5 + rng.below(20), 5 + rng.below(20), 1);
        for (double& v : im.pixels) v = rng.uniform();
        double lo = 1.0, hi = 0.0;
        for (double v : im.pixels) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const ImageBuffer out =
            resize_bilinear(im, 3 + rng.below(30), 3 + rng.below(30));
        for (double v : out.pixels) {
            CHECK(v >= lo - 1e-12);
            CHECK(v <= hi + 1e-12);
        }
    }
}

TEST_CASE("to_gray follows the luminance weights and is idempotent") {
    ImageBuffer red(2, 2, 3);
    for (std::size_t y = 0; y < 2; ++y)
        for (std::size_t x = 0; x < 2; ++x) red.at(y, x, 0) = 1.0;
    const ImageBuffer gray = to_gray(red);
    REQUIRE(gray.channels == 1);
    for (double v : gray.pixels) CHECK(v == doctest::Approx(0.299).epsilon(1e-15));

    const ImageBuffer again = to_gray(gray);
    CHECK(again.pixels == gray.pixels);
}
