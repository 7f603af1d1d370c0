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

#include "roadaug/dataset.hpp"
#include "support/test_util.hpp"

using namespace roadaug;
using namespace roadaug::data;

namespace {

// Hand-built fixture: 5 images, 7 D40 boxes (2 + 2 + 1 + 1 + 1) and one
// D00 box. The counts below are asserted against this enumeration.
std::filesystem::path make_hand_fixture() {
    const auto root = testutil::scratch_dir("dataset");
    namespace fs = std::filesystem;
    fs::create_directories(root / "images");
    fs::create_directories(root / "annotations");

    const auto save = [&](const std::string& stem,
                          const std::vector<Annotation>& anns) {
        img::ImageBuffer im(64, 64, 3, 0.5);
        img::save_image(im, root / "images" / (stem + ".png"));
        testutil::write_voc_xml(root / "annotations" / (stem + ".xml"), stem,
                                anns);
    };
    save("a_two_boxes", {{"D40", {2, 2, 20, 20}}, {"D40", {30, 30, 60, 60}}});
    save("b_two_boxes", {{"D40", {5, 5, 25, 25}}, {"D40", {26, 26, 46, 46}}});
    save("c_one_box", {{"D40", {10, 10, 50, 50}}});
    save("d_mixed", {{"D00", {1, 1, 10, 10}}, {"D40", {12, 12, 40, 40}}});
    save("e_one_box", {{"D40", {8, 8, 44, 44}}});
    return root;
}

}  // namespace

TEST_CASE("ingest returns records in lexicographic image-id order") {
    const auto root = make_hand_fixture();
    const DatasetIndex index = ingest(root);
    REQUIRE(index.records.size() == 5);
    for (std::size_t i = 1; i < index.records.size(); ++i)
        CHECK(index.records[i - 1].image_id < index.records[i].image_id);
    CHECK(index.records[0].image_id == "a_two_boxes");
    CHECK(index.records[0].annotations.size() == 2);
}

TEST_CASE("ingest: annotation referencing an absent image names the id") {
    const auto root = make_hand_fixture();
    testutil::write_voc_xml(root / "annotations" / "ghost.xml", "ghost",
                            {{"D40", {0, 0, 5, 5}}});
    CHECK_THROWS_WITH_AS((void)ingest(root), doctest::Contains("ghost"),
                         InputError);
}

TEST_CASE("ingest: malformed xml names the file") {
    const auto root = make_hand_fixture();
    std::ofstream(root / "annotations" / "a_two_boxes.xml")
        << "<annotation><object><name>D40";
    CHECK_THROWS_WITH_AS((void)ingest(root),
                         doctest::Contains("a_two_boxes.xml"), InputError);
}

TEST_CASE("ingest: empty annotations directory is a valid empty index") {
    const auto root = testutil::scratch_dir("dataset");
    std::filesystem::create_directories(root / "images");
    std::filesystem::create_directories(root / "annotations");
    const DatasetIndex index = ingest(root);
    CHECK(index.records.empty());
}

TEST_CASE("ingest clamps out-of-bounds boxes instead of rejecting them") {
    const auto root = testutil::scratch_dir("dataset");
    namespace fs = std::filesystem;
    fs::create_directories(root / "images");
    fs::create_directories(root / "annotations");
    img::save_image(img::ImageBuffer(32, 32, 1, 0.3),
                    root / "images" / "offby.png");
    testutil::write_voc_xml(root / "annotations" / "offby.xml", "offby",
                            {{"D40", {4, 4, 33, 32}}});
    const DatasetIndex index = ingest(root);
    REQUIRE(index.records.size() == 1);
    CHECK(index.records[0].annotations[0].box.xmax == 32);
}

TEST_CASE("split: paper-scale count and small example") {
    DatasetIndex big;
    big.records.resize(10186);
    for (std::size_t i = 0; i < big.records.size(); ++i)
        big.records[i].image_id = "r" + std::to_string(i);
    split(big, 0.8, 7);
    CHECK(big.count(Split::kTrain) == 8148);
    CHECK(big.count(Split::kValidation) == 2038);

    DatasetIndex ten;
    ten.records.resize(10);
    split(ten, 0.8, 7);
    CHECK(ten.count(Split::kTrain) == 8);
    CHECK(ten.count(Split::kValidation) == 2);
}

TEST_CASE("split: same seed twice gives identical assignments") {
    DatasetIndex a, b;
    a.records.resize(101);
    b.records.resize(101);
    split(a, 0.8, 1234);
    split(b, 0.8, 1234);
    for (std::size_t i = 0; i < a.records.size(); ++i)
        CHECK(a.records[i].split == b.records[i].split);

    // A different seed must give a different assignment somewhere.
    DatasetIndex c;
    c.records.resize(101);
    split(c, 0.8, 1235);
    bool any_differ = false;
    for (std::size_t i = 0; i < a.records.size(); ++i)
        any_differ = any_differ || a.records[i].split != c.records[i].split;
    CHECK(any_differ);
}

TEST_CASE("split is a partition") {
    DatasetIndex index;
    index.records.resize(57);
    split(index, 0.8, 99);
    std::size_t assigned = 0;
    for (const auto& r : index.records) {
        REQUIRE(r.split.has_value());
        ++assigned;
    }
    CHECK(assigned == 57);
    CHECK(index.count(Split::kTrain) + index.count(Split::kValidation) == 57);
    CHECK(index.count(Split::kTrain) == 45);  // floor(0.8 * 57)
}

TEST_CASE("extract_rois: hand-counted fixture yields 7 D40 ROIs") {
    const auto root = make_hand_fixture();
    DatasetIndex index = ingest(root);
    const auto rois = extract_rois(index, "D40", SubsetFilter::kAll);
    CHECK(rois.size() == 7);
    // Deterministic order: by image id, then annotation order.
    CHECK(rois[0].image_id == "a_two_boxes");
    CHECK(rois[0].annotation_index == 0);
    CHECK(rois[1].image_id == "a_two_boxes");
    CHECK(rois[1].annotation_index == 1);
    // Crop dimensions follow the boxes.
    CHECK(rois[0].roi.height == 18);
    CHECK(rois[0].roi.width == 18);

    const auto none = extract_rois(index, "D99", SubsetFilter::kAll);
    CHECK(none.empty());

    const auto d00 = extract_rois(index, "D00", SubsetFilter::kAll);
    CHECK(d00.size() == 1);
    CHECK(d00[0].image_id == "d_mixed");
}

TEST_CASE("index round trip: ingest -> split -> save -> load is lossless") {
    const auto root = make_hand_fixture();
    DatasetIndex index = ingest(root);
    split(index, 0.8, 31);
    const auto path = root / "index.json";
    save_index(index, path);
    const DatasetIndex back = load_index(path);
    REQUIRE(back.records.size() == index.records.size());
    for (std::size_t i = 0; i < index.records.size(); ++i) {
        CHECK(back.records[i].image_id == index.records[i].image_id);
        CHECK(back.records[i].split == index.records[i].split);
        REQUIRE(back.records[i].annotations.size() ==
                index.records[i].annotations.size());
        for (std::size_t k = 0; k < index.records[i].annotations.size(); ++k) {
            CHECK(back.records[i].annotations[k].class_label ==
                  index.records[i].annotations[k].class_label);
            CHECK(back.records[i].annotations[k].box ==
                  index.records[i].annotations[k].box);
        }
    }
    // Saving the loaded index reproduces the file byte for byte.
    const auto path2 = root / "index2.json";
    save_index(back, path2);
    CHECK(testutil::read_file_bytes(path) == testutil::read_file_bytes(path2));
}
