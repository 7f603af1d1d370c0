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

// Shared oracles and fixture builders. Everything here is independent of
// the library's own computation paths: finite differences, dense Gaussian
// elimination, a Jacobi eigensolver, and procedural datasets.

#ifndef ROADAUG_TESTS_SUPPORT_TEST_UTIL_HPP
#define ROADAUG_TESTS_SUPPORT_TEST_UTIL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "roadaug/dataset.hpp"
#include "roadaug/image.hpp"
#include "roadaug/image_io.hpp"
#include "roadaug/rng.hpp"

namespace testutil {

// ---- numeric oracles ------------------------------------------------------

/// Central finite differences of a scalar function of a flat vector.
inline std::vector<double> fd_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h = 1e-6) {
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + h;
        const double fp = f(x);
        x[i] = orig - h;
        const double fm = f(x);
        x[i] = orig;
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

/// Relative error with a floor so near-zero pairs compare absolutely.
inline double rel_err(double a, double b, double floor = 1e-8) {
    const double scale = std::max({std::abs(a), std::abs(b), floor});
    return std::abs(a - b) / scale;
}

inline double max_rel_err(const std::vector<double>& a,
                          const std::vector<double>& b,
                          double floor = 1e-8) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, rel_err(a[i], b[i], floor));
    return worst;
}

/// Worst absolute difference relative to the largest entry of either
/// vector. The right measure when finite differences are roundoff-limited
/// on near-zero coordinates of an otherwise O(1) gradient.
inline double norm_rel_err(const std::vector<double>& a,
                           const std::vector<double>& b) {
    double scale = 1e-8, worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst / scale;
}

/// Dense Gaussian elimination with partial pivoting; the direct-solve
/// oracle for the Poisson systems.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> a,
                                       std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = a[r][col] / a[col][col];
            for (std::size_t cc = col; cc < n; ++cc)
                a[r][cc] -= factor * a[col][cc];
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

/// Smallest eigenvalue of a symmetric matrix via cyclic Jacobi rotations.
inline double smallest_eigenvalue(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-30) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) +
                                  std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    double smallest = a[0][0];
    for (std::size_t i = 1; i < n; ++i) smallest = std::min(smallest, a[i][i]);
    return smallest;
}

// ---- fixtures --------------------------------------------------------------

/// Unique scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    static std::uint64_t counter = 0;
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() /
        ("roadaug_test_" + tag + "_" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Procedural road-like texture: banded noise with mild horizontal streaks.
inline roadaug::img::ImageBuffer make_road_texture(std::size_t h,
                                                   std::size_t w,
                                                   std::uint64_t seed) {
    roadaug::Rng rng(seed);
    roadaug::img::ImageBuffer im(h, w, 1);
    for (std::size_t y = 0; y < h; ++y) {
        const double band =
            0.05 * std::sin(static_cast<double>(y) * 0.7);
        for (std::size_t x = 0; x < w; ++x) {
            const double grain = 0.18 * (rng.uniform() - 0.5);
            const double speck = rng.uniform() < 0.03 ? -0.25 : 0.0;
            im.at(y, x) =
                std::clamp(0.55 + band + grain + speck, 0.0, 1.0);
        }
    }
    return im;
}

/// Texture plus a dark elliptical "pothole" inside the given box.
inline roadaug::img::ImageBuffer make_pothole_image(
    std::size_t h, std::size_t w, const roadaug::img::Box2D& box,
    std::uint64_t seed) {
    roadaug::img::ImageBuffer gray = make_road_texture(h, w, seed);
    const double cx = 0.5 * (box.xmin + box.xmax);
    const double cy = 0.5 * (box.ymin + box.ymax);
    const double rx = 0.5 * box.width() * 0.8;
    const double ry = 0.5 * box.height() * 0.8;
    roadaug::Rng rng(roadaug::mix64(seed + 1));
    for (int y = box.ymin; y < box.ymax; ++y)
        for (int x = box.xmin; x < box.xmax; ++x) {
            const double dx = (x - cx) / rx;
            const double dy = (y - cy) / ry;
            const double d = dx * dx + dy * dy;
            if (d < 1.0) {
                const double depth = 0.45 * (1.0 - d) + 0.08 * rng.uniform();
                gray.at(static_cast<std::size_t>(y),
                        static_cast<std::size_t>(x)) =
                    std::clamp(gray.at(static_cast<std::size_t>(y),
                                       static_cast<std::size_t>(x)) -
                                   depth,
                               0.0, 1.0);
            }
        }
    // 3-channel with a faint asphalt tint so color handling is exercised.
    roadaug::img::ImageBuffer rgb(h, w, 3);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            const double v = gray.at(y, x);
            rgb.at(y, x, 0) = std::clamp(v * 1.02, 0.0, 1.0);
            rgb.at(y, x, 1) = v;
            rgb.at(y, x, 2) = std::clamp(v * 0.97, 0.0, 1.0);
        }
    return rgb;
}

inline void write_voc_xml(const std::filesystem::path& path,
                          const std::string& stem,
                          const std::vector<roadaug::data::Annotation>& anns) {
    std::ostringstream xml;
    xml << "<annotation>\n";
    xml << "  <filename>" << stem << ".png</filename>\n";
    for (const auto& a : anns) {
        xml << "  <object>\n";
        xml << "    <name>" << a.class_label << "</name>\n";
        xml << "    <bndbox>\n";
        xml << "      <xmin>" << a.box.xmin << "</xmin>\n";
        xml << "      <ymin>" << a.box.ymin << "</ymin>\n";
        xml << "      <xmax>" << a.box.xmax << "</xmax>\n";
        xml << "      <ymax>" << a.box.ymax << "</ymax>\n";
        xml << "    </bndbox>\n";
        xml << "  </object>\n";
    }
    xml << "</annotation>\n";
    std::ofstream out(path);
    out << xml.str();
}

struct ToyDatasetSpec {
    std::size_t image_count = 12;
    std::size_t image_side = 96;
    // One pothole box per image by default; images at these indices get a
    // second one.
    std::vector<std::size_t> double_box_images;
    // Images at these indices get a non-target "D00" box instead.
    std::vector<std::size_t> other_class_images;
    std::uint64_t seed = 2024;
};

/// Writes `<root>/images/img_XX.png` + `<root>/annotations/img_XX.xml`.
/// Boxes are >= 36 px wide and keep a margin from the image edge so the
/// texture bank and the Poisson solver both accept them.
inline void make_toy_dataset(const std::filesystem::path& root,
                             const ToyDatasetSpec& spec) {
    namespace fs = std::filesystem;
    fs::create_directories(root / "images");
    fs::create_directories(root / "annotations");
    roadaug::Rng rng(spec.seed);
    for (std::size_t i = 0; i < spec.image_count; ++i) {
        std::ostringstream stem;
        stem << "img_" << (i < 10 ? "0" : "") << i;
        const bool other = std::find(spec.other_class_images.begin(),
                                     spec.other_class_images.end(),
                                     i) != spec.other_class_images.end();
        const bool doubled = std::find(spec.double_box_images.begin(),
                                       spec.double_box_images.end(),
                                       i) != spec.double_box_images.end();

        const int side = static_cast<int>(spec.image_side);
        const int box_side = 36 + static_cast<int>(rng.below(8));
        const int x0 = 4 + static_cast<int>(rng.below(
                               static_cast<std::uint64_t>(side - box_side - 8)));
        const int y0 = 4 + static_cast<int>(rng.below(
                               static_cast<std::uint64_t>(side - box_side - 8)));
        std::vector<roadaug::data::Annotation> anns;
        anns.push_back({other ? "D00" : "D40",
                        {x0, y0, x0 + box_side, y0 + box_side}});
        if (doubled && !other) {
            // Second, smaller box in the opposite corner region.
            const int bx = side - box_side - 6;
            const int by = side - box_side - 6;
            anns.push_back(
                {"D40", {bx, by, bx + box_side - 2, by + box_side - 2}});
        }
        roadaug::img::ImageBuffer im = make_pothole_image(
            spec.image_side, spec.image_side, anns[0].box,
            roadaug::mix64(spec.seed + i));
        write_voc_xml(root / "annotations" / (stem.str() + ".xml"),
                      stem.str(), anns);
        roadaug::img::save_image(im, root / "images" / (stem.str() + ".png"));
    }
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

/// Recursive byte comparison of two directory trees.
inline bool trees_identical(const std::filesystem::path& a,
                            const std::filesystem::path& b) {
    namespace fs = std::filesystem;
    std::vector<fs::path> rel_a, rel_b;
    for (const auto& entry : fs::recursive_directory_iterator(a))
        if (entry.is_regular_file())
            rel_a.push_back(fs::relative(entry.path(), a));
    for (const auto& entry : fs::recursive_directory_iterator(b))
        if (entry.is_regular_file())
            rel_b.push_back(fs::relative(entry.path(), b));
    std::sort(rel_a.begin(), rel_a.end());
    std::sort(rel_b.begin(), rel_b.end());
    if (rel_a != rel_b) return false;
    for (const fs::path& rel : rel_a)
        if (read_file_bytes(a / rel) != read_file_bytes(b / rel)) return false;
    return true;
}

}  // namespace testutil

#endif  // ROADAUG_TESTS_SUPPORT_TEST_UTIL_HPP
